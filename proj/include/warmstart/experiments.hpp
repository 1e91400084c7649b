#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "warmstart/config.hpp"

namespace warmstart {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

struct RunOptions {
    std::string outdir = "out";
    std::optional<std::uint64_t> seed; // overrides the config's [run] seed
    bool long_run = false;             // adds the n = 10 system sizes
    std::string git = "unknown";
};

const std::vector<std::string> &subcommand_names();

// Runs one subcommand, writing <outdir>/<name>.csv, any companion CSVs and
// <outdir>/<name>.meta.json. Human-readable progress goes to `log`.
// Returns kExitOk, kExitValidation or kExitNumeric; never throws.
int run_subcommand(const std::string &name, const Config &cfg, const RunOptions &opts,
                   std::ostream &log);

struct SelfCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// 1-2 qubit checks against dense matrices and closed forms.
std::vector<SelfCheck> run_selftest();

} // namespace warmstart
