#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace trivine::cli {

enum ExitCode : int { kOk = 0, kError = 1, kInputError = 2, kNotConverged = 3 };

struct Options {
    std::string data;
    std::string config;
    std::string out;
    std::string csv;
    std::string fit;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> nq;
    std::optional<unsigned> threads;
};

int cmd_fit(const Options& o);
int cmd_scan(const Options& o);
int cmd_simulate(const Options& o);
int cmd_simstudy(const Options& o);
int cmd_sroc(const Options& o);

}  // namespace trivine::cli
