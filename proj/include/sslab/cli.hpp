#pragma once

// Command-line front end. Subcommands: levelset, homoclinic, heteroclinic,
// periodic, pde-verify, decay-fit.

#include <iosfwd>
#include <map>
#include <string>

namespace sslab::cli {

enum ExitCode : int { ok = 0, validation = 2, numerical = 3, io = 4 };

/// Runs the CLI on argv (argv[0] is the program name). Progress goes to out,
/// diagnostics to err. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// key -> value pairs of one section of an INI file. Keys keep their
/// spelling; '#' and ';' start comments. Throws ValidationError on syntax
/// errors and IoError when the file cannot be read.
std::map<std::string, std::string> read_ini_section(const std::string& path, const std::string& section);

const char* version();

}  // namespace sslab::cli
