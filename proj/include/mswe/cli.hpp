#ifndef MSWE_CLI_HPP
#define MSWE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mswe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (preprocess, build-vocab, train-lda, train, eval-sim,
/// eval-analogy). Results go to `out`, diagnostics and logs to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mswe

#endif  // MSWE_CLI_HPP
