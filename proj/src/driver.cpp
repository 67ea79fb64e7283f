#include "apollo/driver.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "apollo/avm/text.hpp"
#include "apollo/avm/vm.hpp"
#include "apollo/codegen.hpp"
#include "apollo/frontend/lexer.hpp"
#include "apollo/frontend/parser.hpp"

namespace apollo {

CompileResult compile_source(std::string_view source) {
    CompileResult result;
    frontend::LexResult lexed = frontend::tokenize(source);
    if (!lexed.ok()) {
        result.diagnostics = std::move(lexed.diagnostics);
        return result;
    }
    frontend::ParseResult parsed = frontend::parse(lexed.tokens);
    if (!parsed.ok()) {
        result.diagnostics = std::move(parsed.diagnostics);
        return result;
    }
    frontend::CheckResult checked = frontend::check(parsed.program);
    if (!checked.ok()) {
        result.diagnostics = std::move(checked.diagnostics);
        return result;
    }
    result.program = codegen::generate(parsed.program, checked.symbols);
    result.ok = true;
    return result;
}

namespace cli {

namespace {

using json = nlohmann::ordered_json;

bool read_file(const std::string& path, std::string& out, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << "error: cannot open '" << path << "'\n";
        return false;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    out = buffer.str();
    return true;
}

void print_diagnostics(const std::string& path, const std::vector<frontend::Diagnostic>& diags,
                       std::ostream& err) {
    for (const frontend::Diagnostic& d : diags)
        err << path << ":" << d.line << ":" << d.col << ": " << d.message << "\n";
}

bool has_suffix(const std::string& path, const char* suffix) {
    std::string_view sv = path;
    std::string_view sf = suffix;
    return sv.size() >= sf.size() && sv.substr(sv.size() - sf.size()) == sf;
}

std::string render_float(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

void render_tensor(const DenseTensor& t, int precision, int mode, std::int64_t offset,
                   std::ostream& out) {
    if (mode == t.rank()) {
        out << render_float(t[offset], precision);
        return;
    }
    std::int64_t stride = 1;
    for (int k = mode + 1; k < t.rank(); ++k) stride *= t.shape().extent(k);
    out << "{";
    for (std::int64_t i = 0; i < t.shape().extent(mode); ++i) {
        if (i) out << ", ";
        render_tensor(t, precision, mode + 1, offset + i * stride, out);
    }
    out << "}";
}

void print_word(const avm::Vm& vm, const avm::Word& w, int precision, std::ostream& out) {
    switch (w.tag) {
        case avm::Word::Tag::Int:
            out << w.i;
            return;
        case avm::Word::Tag::Float:
            out << render_float(w.f, precision);
            return;
        case avm::Word::Tag::Ref:
            render_tensor(vm.read_tensor(w), precision, 0, 0, out);
            return;
    }
}

json tensor_to_json(const DenseTensor& t, int mode, std::int64_t offset) {
    if (mode == t.rank()) return t[offset];
    std::int64_t stride = 1;
    for (int k = mode + 1; k < t.rank(); ++k) stride *= t.shape().extent(k);
    json arr = json::array();
    for (std::int64_t i = 0; i < t.shape().extent(mode); ++i)
        arr.push_back(tensor_to_json(t, mode + 1, offset + i * stride));
    return arr;
}

json word_to_json(const avm::Vm& vm, const avm::Word& w) {
    switch (w.tag) {
        case avm::Word::Tag::Int: return w.i;
        case avm::Word::Tag::Float: return w.f;
        case avm::Word::Tag::Ref: return tensor_to_json(vm.read_tensor(w), 0, 0);
    }
    return nullptr;
}

struct RunFlags {
    bool stats = false;
    bool trace = false;
    std::int64_t max_dim = 0;
    int precision = 9;
};

// Shared by `run file.apl` and `run file.avm`; both paths must print the
// same bytes for the same program.
int execute_program(const avm::Program& program, const RunFlags& flags, std::ostream& out,
                    std::ostream& err) {
    avm::VmOptions options;
    options.max_dim = flags.max_dim;
    if (flags.trace) options.trace = &err;
    avm::Vm vm(program, options);
    try {
        vm.run();
    } catch (const avm::Trap& trap) {
        err << "error: " << trap.what() << "\n";
        return 2;
    }
    for (std::size_t i = 0; i < program.globals.size(); ++i) {
        out << program.globals[i].name << " = ";
        print_word(vm, vm.global(static_cast<std::int64_t>(i)), flags.precision, out);
        out << "\n";
    }
    if (flags.stats) {
        json stats;
        stats["mvmul_count"] = vm.stats().mvmul_count;
        stats["host_ops"] = vm.stats().host_ops;
        stats["heap_words"] = vm.stats().heap_words;
        stats["max_stack_depth"] = vm.stats().max_stack_depth;
        json globals = json::object();
        for (std::size_t i = 0; i < program.globals.size(); ++i)
            globals[program.globals[i].name] =
                word_to_json(vm, vm.global(static_cast<std::int64_t>(i)));
        stats["globals"] = std::move(globals);
        out << stats.dump() << "\n";
    }
    return 0;
}

int cmd_compile(const std::string& input, std::string output, std::ostream& out,
                std::ostream& err) {
    (void)out;
    std::string source;
    if (!read_file(input, source, err)) return 1;
    CompileResult compiled = compile_source(source);
    if (!compiled.ok) {
        print_diagnostics(input, compiled.diagnostics, err);
        return 1;
    }
    if (output.empty()) {
        output = input;
        if (has_suffix(output, ".apl")) output.resize(output.size() - 4);
        output += ".avm";
    }
    std::ofstream os(output, std::ios::binary);
    if (!os) {
        err << "error: cannot write '" << output << "'\n";
        return 1;
    }
    avm::write_text(compiled.program, os);
    return 0;
}

int cmd_run(const std::string& input, const RunFlags& flags, std::ostream& out,
            std::ostream& err) {
    std::string text;
    if (!read_file(input, text, err)) return 1;
    avm::Program program;
    if (has_suffix(input, ".avm")) {
        std::istringstream is(text);
        try {
            program = avm::parse_text(is);
        } catch (const avm::FormatError& e) {
            err << input << ": " << e.what() << "\n";
            return 1;
        }
    } else {
        CompileResult compiled = compile_source(text);
        if (!compiled.ok) {
            print_diagnostics(input, compiled.diagnostics, err);
            return 1;
        }
        program = std::move(compiled.program);
    }
    try {
        return execute_program(program, flags, out, err);
    } catch (const avm::LoadError& e) {
        err << input << ": " << e.what() << "\n";
        return 1;
    }
}

int cmd_check(const std::string& input, std::ostream& err) {
    std::string source;
    if (!read_file(input, source, err)) return 1;
    CompileResult compiled = compile_source(source);
    if (!compiled.ok) {
        print_diagnostics(input, compiled.diagnostics, err);
        return 1;
    }
    return 0;
}

int cmd_mem(const std::string& input, std::ostream& out, std::ostream& err) {
    std::string source;
    if (!read_file(input, source, err)) return 1;
    CompileResult compiled = compile_source(source);
    if (!compiled.ok) {
        print_diagnostics(input, compiled.diagnostics, err);
        return 1;
    }
    for (std::size_t k = 0; k < compiled.program.literals.size(); ++k) {
        const avm::Literal& lit = compiled.program.literals[k];
        bstt::BsttTensor t = bstt::reconstruct(lit.flat, lit.shape);
        bstt::MemoryReport report = bstt::memory_words(t);
        out << "t" << k << ": dense=" << report.dense << " bstt_flat=" << report.bstt_flat
            << " bstt_impl=" << report.bstt_impl << " csf=" << bstt::csf_memory_words(t)
            << " nnz=" << t.nnz() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Apollo tensor-algebra compiler and virtual machine"};
    app.require_subcommand(1);

    std::string input;
    std::string output;
    RunFlags flags;

    CLI::App* compile = app.add_subcommand("compile", "Compile a .apl source file to .avm text");
    compile->add_option("input", input, ".apl source file")->required();
    compile->add_option("-o,--output", output, "output path (default: input with .avm)");

    CLI::App* run = app.add_subcommand("run", "Execute a .apl source or .avm program");
    run->add_option("input", input, ".apl or .avm file")->required();
    run->add_flag("--stats", flags.stats, "append a JSON stats document");
    run->add_flag("--trace", flags.trace, "trace instructions to the error stream");
    run->add_option("--max-dim", flags.max_dim, "accelerator size cap (N x N)");
    run->add_option("--precision", flags.precision, "significant digits for floats (default 9)");

    CLI::App* check = app.add_subcommand("check", "Parse and type-check only");
    check->add_option("input", input, ".apl source file")->required();

    CLI::App* mem = app.add_subcommand("mem", "Report literal memory footprints");
    mem->add_option("input", input, ".apl source file")->required();

    std::vector<const char*> argv;
    argv.push_back("apollo");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    if (compile->parsed()) return cmd_compile(input, output, out, err);
    if (run->parsed()) return cmd_run(input, flags, out, err);
    if (check->parsed()) return cmd_check(input, err);
    return cmd_mem(input, out, err);
}

}  // namespace cli
}  // namespace apollo
