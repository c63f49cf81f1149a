#pragma once

#include "trivine/estimation.hpp"
#include "trivine/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trivine {

/// Input error with a 1-based location; column 0 means "whole line".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Header `study_id,y00,y01,y10,y11,y20,y21` (any column order) is
/// required. Counts must be nonnegative integers and ids unique.
std::vector<StudyData> read_dataset_csv(std::istream& is, const std::string& source = "<input>");
std::vector<StudyData> read_dataset_file(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& os, std::span<const StudyData> data);

/// Template line: `<margin>[:<link>] <edge_a> <edge_b> <edge_cond>` followed
/// by optional `perm=<1|2|3>`, `truncated` and `label=<text>` tokens.
ModelTemplate parse_template_line(const std::string& line);

/// Named template grids: "application" and "simulation" (eight cells each;
/// they differ in which edges share a Clayton rotation) plus "tglmm".
std::vector<ModelTemplate> preset_templates(const std::string& name);

/// Data-generating models "normal" and "beta" of the simulation protocol.
ModelSpec preset_truth(const std::string& name);

struct StartValues {
    std::array<std::optional<double>, 3> pi;
    std::array<std::optional<double>, 3> delta;
    std::array<std::optional<double>, 3> tau;
};

/// Flat `section.key = value` configuration; `#` starts a comment.
struct RunConfig {
    ModelTemplate model;
    StartValues start;
    FitConfig fit;

    std::vector<ModelTemplate> scan_candidates;

    std::optional<ModelSpec> truth;
    Scenario scenario;
    std::size_t n_studies = 30;
    std::size_t replicates = 500;
    std::size_t sim_nq = 15;
    SizeLaw size_law;
    std::vector<ModelTemplate> sim_templates;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig read_config_file(const std::filesystem::path& path);

/// Merges explicit start values over the data-driven defaults. Throws
/// std::domain_error naming the admissible interval when a tau start lies
/// outside its edge's range.
NaturalParams resolve_start(const StartValues& s, std::span<const StudyData> data, const ModelTemplate& t);

std::string fit_to_json(const FitResult& fit);
/// Reads the output of fit_to_json back; the model is rebuilt from the
/// stored template and estimates.
FitResult fit_from_json(const std::string& text);

std::string scan_to_json(const std::vector<ScanEntry>& entries, std::span<const ModelTemplate> candidates);
/// One row per candidate in ranked order: status, logL and the nine
/// estimates with their standard errors.
void write_scan_csv(std::ostream& os, const std::vector<ScanEntry>& entries, std::span<const ModelTemplate> candidates);

}  // namespace trivine
