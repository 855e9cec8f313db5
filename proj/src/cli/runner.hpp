#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace curvlab::cli {

// Exit codes of the command line tool.
enum ExitCode { ok = 0, usage = 1, validation = 2, solver = 3, io = 4 };

// Each returns the process exit code. Errors are reported on `err` as a
// one-line JSON record; no artifacts are left behind for a failed run.
int run_command(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int sweep_command(const std::filesystem::path& config, std::ostream& out, std::ostream& err, int threads = 0);
int validate_command(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int list_tasks_command(std::ostream& out);

// argv front end shared by the tool and the tests.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace curvlab::cli
