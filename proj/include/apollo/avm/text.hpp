#pragma once

#include <iosfwd>
#include <stdexcept>

#include "apollo/avm/program.hpp"

namespace apollo::avm {

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// The .avm text format. Three sections:
///
///   .literals   one record per line:
///               t<k> rank R dims d1 ... dR bstt <hex-encoded flat BSTT>
///   .globals    one declared variable per line: g<i> <name> <int|float|tensor>
///   .code       one instruction per line ("push constant 3", "mvmul",
///               "call malloc 1", ...)
///
/// '#' begins a comment line; blank lines are ignored.
void write_text(const Program& program, std::ostream& out);

/// Parses write_text output (or hand-written programs). Throws FormatError
/// with a line number on malformed input.
Program parse_text(std::istream& in);

}  // namespace apollo::avm
