#include "trivine/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace trivine {

using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::optional<long> parse_count(const std::string& text) {
    long v = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || text.empty()) {
        return std::nullopt;
    }
    return v;
}

double parse_real(const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number, got '" + text + "'");
    }
    if (pos != text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite number, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& text) {
    std::uint64_t v = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || text.empty()) {
        throw std::invalid_argument("expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& text) {
    const std::string t = lower(text);
    if (t == "true" || t == "yes" || t == "1" || t == "on") {
        return true;
    }
    if (t == "false" || t == "no" || t == "0" || t == "off") {
        return false;
    }
    throw std::invalid_argument("expected true/false, got '" + text + "'");
}

const std::array<const char*, 7> kColumns{"study_id", "y00", "y01", "y10", "y11", "y20", "y21"};

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + (column ? ":" + std::to_string(column) : "") + ": " +
                         what),
      line_(line),
      column_(column) {}

std::vector<StudyData> read_dataset_csv(std::istream& is, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw ParseError(source, std::max<std::size_t>(line_no, 1), 0, "empty file (header row required)");
    }
    std::array<std::size_t, 7> index{};
    index.fill(std::numeric_limits<std::size_t>::max());
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = lower(trim(header[c]));
        for (std::size_t k = 0; k < kColumns.size(); ++k) {
            if (name == kColumns[k]) {
                if (index[k] != std::numeric_limits<std::size_t>::max()) {
                    throw ParseError(source, line_no, c + 1, "duplicate column '" + name + "'");
                }
                index[k] = c;
            }
        }
    }
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (index[k] == std::numeric_limits<std::size_t>::max()) {
            throw ParseError(source, line_no, 0, std::string("missing column '") + kColumns[k] + "'");
        }
    }

    std::vector<StudyData> out;
    std::set<std::string> ids;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError(source, line_no, 0,
                             "expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()));
        }
        StudyData s;
        s.id = trim(cells[index[0]]);
        if (s.id.empty()) {
            throw ParseError(source, line_no, index[0] + 1, "empty study_id");
        }
        std::array<long*, 6> slots{&s.y00, &s.y01, &s.y10, &s.y11, &s.y20, &s.y21};
        for (std::size_t k = 1; k < kColumns.size(); ++k) {
            const std::string text = trim(cells[index[k]]);
            const auto v = parse_count(text);
            if (!v) {
                throw ParseError(source, line_no, index[k] + 1,
                                 std::string("column '") + kColumns[k] + "': '" + text + "' is not an integer count");
            }
            if (*v < 0) {
                throw ParseError(source, line_no, index[k] + 1,
                                 std::string("column '") + kColumns[k] + "': negative count " + text);
            }
            *slots[k - 1] = *v;
        }
        if (s.total() == 0) {
            throw ParseError(source, line_no, 0, "study '" + s.id + "' has no subjects");
        }
        if (!ids.insert(s.id).second) {
            throw ParseError(source, line_no, index[0] + 1, "duplicate study_id '" + s.id + "'");
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) {
        throw ParseError(source, line_no, 0, "no data rows");
    }
    return out;
}

std::vector<StudyData> read_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, 0, "cannot open file");
    }
    return read_dataset_csv(in, path.string());
}

void write_dataset_csv(std::ostream& os, std::span<const StudyData> data) {
    os << "study_id,y00,y01,y10,y11,y20,y21\n";
    for (const StudyData& s : data) {
        os << csv_field(s.id) << ',' << s.y00 << ',' << s.y01 << ',' << s.y10 << ',' << s.y11 << ',' << s.y20 << ','
           << s.y21 << '\n';
    }
}

ModelTemplate parse_template_line(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) {
        tok.push_back(t);
    }
    if (tok.size() < 4) {
        throw std::invalid_argument("template '" + line + "': expected '<margin>[:<link>] <edge_a> <edge_b> <edge_cond>'");
    }
    ModelTemplate t;
    std::string margin = tok[0];
    std::string link;
    if (const auto pos = margin.find(':'); pos != std::string::npos) {
        link = margin.substr(pos + 1);
        margin = margin.substr(0, pos);
    }
    t.margin = parse_margin_family(margin);
    if (t.margin == MarginFamily::Beta) {
        if (!link.empty() && parse_link(link) != Link::Identity) {
            throw std::invalid_argument("template '" + line + "': beta margins use the identity link");
        }
        t.link = Link::Identity;
    } else {
        t.link = link.empty() ? Link::Logit : parse_link(link);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        t.edges[k] = parse_family(tok[k + 1]);
    }
    for (std::size_t i = 4; i < tok.size(); ++i) {
        const std::string& w = tok[i];
        if (w == "truncated") {
            t.truncated = true;
        } else if (w.rfind("perm=", 0) == 0) {
            t.permutation = parse_permutation(w.substr(5));
        } else if (w.rfind("label=", 0) == 0) {
            t.label = w.substr(6);
        } else {
            throw std::invalid_argument("template '" + line + "': unknown token '" + w + "'");
        }
    }
    if (t.truncated) {
        t.edges[2] = CopulaFamily{};
    }
    validate(t);
    return t;
}

std::vector<ModelTemplate> preset_templates(const std::string& name) {
    // Application grid: Cln{w1,w2} puts w1 on edge 12 and w2 on edges 13
    // and 23|1. Simulation grid: w1 on edge 13, w2 on edges 12 and 23|1.
    std::vector<std::string> lines;
    if (name == "application") {
        for (const char* m : {"normal", "beta"}) {
            const std::string s(m);
            lines.push_back(s + " bvn bvn bvn label=BVN");
            lines.push_back(s + " cln0 cln90 cln90 label=Cln{0,90}");
            lines.push_back(s + " cln0 cln270 cln270 label=Cln{0,270}");
            lines.push_back(s + " frank frank frank label=Frank");
        }
    } else if (name == "simulation") {
        for (const char* m : {"normal", "beta"}) {
            const std::string s(m);
            lines.push_back(s + " bvn bvn bvn label=BVN");
            lines.push_back(s + " cln90 cln0 cln90 label=Cln{0,90}");
            lines.push_back(s + " cln270 cln0 cln270 label=Cln{0,270}");
            lines.push_back(s + " frank frank frank label=Frank");
        }
    } else if (name == "tglmm") {
        lines.push_back("normal bvn bvn bvn label=BVN");
    } else {
        throw std::invalid_argument("unknown template preset '" + name + "' (expected application, simulation, tglmm)");
    }
    std::vector<ModelTemplate> out;
    for (const std::string& l : lines) {
        out.push_back(parse_template_line(l));
    }
    return out;
}

ModelSpec preset_truth(const std::string& name) {
    NaturalParams p;
    p.pi = {0.7, 0.9, 0.25};
    p.tau = {-0.5, 0.5, -0.5};
    ModelTemplate t;
    if (name == "normal") {
        t = parse_template_line("normal:logit cln90 cln0 cln90");
        p.delta = {1.0, 1.0, 1.0};
    } else if (name == "beta") {
        t = parse_template_line("beta cln90 cln0 cln90");
        p.delta = {0.1, 0.1, 0.1};
    } else {
        throw std::invalid_argument("unknown truth preset '" + name + "' (expected normal, beta)");
    }
    return make_model(t, p);
}

namespace {

struct Located {
    std::string value;
    std::size_t line = 0;
};

int index_suffix(const std::string& key, const std::string& prefix) {
    if (key.size() != prefix.size() + 1 || key.compare(0, prefix.size(), prefix) != 0) {
        return -1;
    }
    const char c = key.back();
    return (c >= '1' && c <= '3') ? c - '1' : -1;
}

int tau_slot(const std::string& key) {
    if (key == "tau_a") {
        return 0;
    }
    if (key == "tau_b") {
        return 1;
    }
    if (key == "tau_cond") {
        return 2;
    }
    return -1;
}

}  // namespace

RunConfig parse_config(std::istream& is, const std::string& source) {
    RunConfig cfg;
    std::map<std::string, Located> truth_keys;
    std::array<std::size_t, 3> tau_start_line{};
    std::string line;
    std::size_t line_no = 0;
    bool model_edges_set = false;

    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source, line_no, 0, "expected 'section.key = value'");
        }
        const std::string key = lower(trim(std::string_view(body).substr(0, eq)));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
            throw ParseError(source, line_no, 1, "key '" + key + "' lacks a section prefix");
        }
        const std::string section = key.substr(0, dot);
        const std::string name = key.substr(dot + 1);
        if (value.empty()) {
            throw ParseError(source, line_no, eq + 2, "key '" + key + "' has an empty value");
        }
        const std::size_t value_col = body.find(value, eq) + 1;
        try {
            bool known = true;
            if (section == "model") {
                if (name == "margin") {
                    cfg.model.margin = parse_margin_family(value);
                    if (cfg.model.margin == MarginFamily::Beta) {
                        cfg.model.link = Link::Identity;
                    } else if (cfg.model.link == Link::Identity) {
                        cfg.model.link = Link::Logit;
                    }
                } else if (name == "link") {
                    cfg.model.link = parse_link(value);
                } else if (name == "permutation") {
                    cfg.model.permutation = parse_permutation(value);
                } else if (name == "edge_a" || name == "edge_b" || name == "edge_cond") {
                    const int k = name == "edge_a" ? 0 : name == "edge_b" ? 1 : 2;
                    cfg.model.edges[static_cast<std::size_t>(k)] = parse_family(value);
                    model_edges_set = true;
                } else if (name == "copula") {
                    const CopulaFamily f = parse_family(value);
                    cfg.model.edges = {f, f, f};
                    model_edges_set = true;
                } else if (name == "truncated") {
                    cfg.model.truncated = parse_bool(value);
                } else if (name == "label") {
                    cfg.model.label = value;
                } else {
                    known = false;
                }
            } else if (section == "start") {
                if (const int k = index_suffix(name, "pi"); k >= 0) {
                    cfg.start.pi[static_cast<std::size_t>(k)] = parse_real(value);
                } else if (const int k2 = index_suffix(name, "delta"); k2 >= 0) {
                    cfg.start.delta[static_cast<std::size_t>(k2)] = parse_real(value);
                } else if (const int k3 = tau_slot(name); k3 >= 0) {
                    cfg.start.tau[static_cast<std::size_t>(k3)] = parse_real(value);
                    tau_start_line[static_cast<std::size_t>(k3)] = line_no;
                } else {
                    known = false;
                }
            } else if (section == "fit") {
                if (name == "nq") {
                    cfg.fit.n_q = parse_unsigned(value);
                    if (cfg.fit.n_q < 2) {
                        throw std::invalid_argument("nq must be at least 2");
                    }
                } else if (name == "max_iters") {
                    cfg.fit.max_iters = static_cast<int>(parse_unsigned(value));
                } else if (name == "tolerance") {
                    cfg.fit.tolerance = parse_real(value);
                    if (cfg.fit.tolerance <= 0.0) {
                        throw std::invalid_argument("tolerance must be positive");
                    }
                } else if (name == "restarts") {
                    cfg.fit.restarts = static_cast<int>(parse_unsigned(value));
                } else {
                    known = false;
                }
            } else if (section == "scan") {
                if (name == "candidate") {
                    cfg.scan_candidates.push_back(parse_template_line(value));
                } else if (name == "preset") {
                    for (ModelTemplate& t : preset_templates(value)) {
                        cfg.scan_candidates.push_back(std::move(t));
                    }
                } else {
                    known = false;
                }
            } else if (section == "truth") {
                static const std::set<std::string> keys{"preset", "margin", "link", "permutation", "edge_a", "edge_b",
                                                        "edge_cond", "pi1", "pi2", "pi3", "delta1", "delta2", "delta3",
                                                        "tau_a", "tau_b", "tau_cond"};
                if (keys.count(name) == 0) {
                    known = false;
                } else {
                    truth_keys[name] = {value, line_no};
                }
            } else if (section == "sim") {
                if (name == "v4" || name == "v5") {
                    const double v = parse_real(value);
                    if (!(v >= 0.0 && v < 1.0)) {
                        throw std::invalid_argument(name + " must lie in [0, 1)");
                    }
                    (name == "v4" ? cfg.scenario.v4 : cfg.scenario.v5) = v;
                } else if (name == "n_studies") {
                    cfg.n_studies = parse_unsigned(value);
                    if (cfg.n_studies == 0) {
                        throw std::invalid_argument("n_studies must be positive");
                    }
                } else if (name == "replicates") {
                    cfg.replicates = parse_unsigned(value);
                } else if (name == "nq") {
                    cfg.sim_nq = parse_unsigned(value);
                    if (cfg.sim_nq < 2) {
                        throw std::invalid_argument("nq must be at least 2");
                    }
                } else if (name == "seed") {
                    cfg.seed = parse_unsigned(value);
                } else if (name == "threads") {
                    cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, parse_unsigned(value)));
                } else if (name == "size_shape" || name == "size_rate" || name == "size_lag") {
                    const double v = parse_real(value);
                    if (name != "size_lag" ? v <= 0.0 : v < 0.0) {
                        throw std::invalid_argument(name + " is out of range");
                    }
                    (name == "size_shape" ? cfg.size_law.shape
                                          : name == "size_rate" ? cfg.size_law.rate : cfg.size_law.lag) = v;
                } else if (name == "template") {
                    cfg.sim_templates.push_back(parse_template_line(value));
                } else if (name == "preset") {
                    for (ModelTemplate& t : preset_templates(value)) {
                        cfg.sim_templates.push_back(std::move(t));
                    }
                } else {
                    known = false;
                }
            } else {
                throw ParseError(source, line_no, 1, "unknown section '" + section + "'");
            }
            if (!known) {
                throw ParseError(source, line_no, 1, "unknown key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(source, line_no, value_col, key + ": " + e.what());
        }
    }

    if (cfg.model.truncated) {
        cfg.model.edges[2] = CopulaFamily{};
    }
    if (!model_edges_set) {
        cfg.model.edges = {make_family(CopulaKind::BVN), make_family(CopulaKind::BVN), make_family(CopulaKind::BVN)};
        if (cfg.model.truncated) {
            cfg.model.edges[2] = CopulaFamily{};
        }
    }
    try {
        validate(cfg.model);
    } catch (const std::exception& e) {
        throw ParseError(source, line_no, 0, std::string("model: ") + e.what());
    }
    for (std::size_t k = 0; k < 3; ++k) {
        if (!cfg.start.tau[k]) {
            continue;
        }
        const std::string label = edge_labels(cfg.model.permutation)[k];
        try {
            if (!cfg.model.edge_free(static_cast<int>(k))) {
                throw std::domain_error("edge " + label + " has no free parameter");
            }
            (void)tau_to_theta(cfg.model.edges[k], *cfg.start.tau[k]);
        } catch (const std::exception& e) {
            throw ParseError(source, tau_start_line[k], 0,
                             "start tau for edge " + label + " (" + to_string(cfg.model.edges[k]) + "): " + e.what());
        }
    }

    if (!truth_keys.empty()) {
        auto get = [&](const std::string& k) -> const Located* {
            const auto it = truth_keys.find(k);
            return it == truth_keys.end() ? nullptr : &it->second;
        };
        std::size_t where = 0;
        try {
            ModelTemplate t;
            NaturalParams p;
            if (const Located* pre = get("preset")) {
                where = pre->line;
                const ModelSpec base = preset_truth(pre->value);
                t = template_of(base);
                p = natural_params(base);
            } else {
                t.edges = {make_family(CopulaKind::BVN), make_family(CopulaKind::BVN), make_family(CopulaKind::BVN)};
            }
            if (const Located* v = get("margin")) {
                where = v->line;
                t.margin = parse_margin_family(v->value);
                t.link = t.margin == MarginFamily::Beta ? Link::Identity : Link::Logit;
            }
            if (const Located* v = get("link")) {
                where = v->line;
                t.link = parse_link(v->value);
            }
            if (const Located* v = get("permutation")) {
                where = v->line;
                t.permutation = parse_permutation(v->value);
            }
            const char* edge_keys[3] = {"edge_a", "edge_b", "edge_cond"};
            const char* tau_keys[3] = {"tau_a", "tau_b", "tau_cond"};
            for (std::size_t k = 0; k < 3; ++k) {
                if (const Located* v = get(edge_keys[k])) {
                    where = v->line;
                    t.edges[k] = parse_family(v->value);
                }
                if (const Located* v = get("pi" + std::to_string(k + 1))) {
                    where = v->line;
                    p.pi[k] = parse_real(v->value);
                }
                if (const Located* v = get("delta" + std::to_string(k + 1))) {
                    where = v->line;
                    p.delta[k] = parse_real(v->value);
                }
                if (const Located* v = get(tau_keys[k])) {
                    where = v->line;
                    p.tau[k] = parse_real(v->value);
                }
            }
            t.truncated = t.edges[2].kind == CopulaKind::Independence;
            for (std::size_t k = 0; k < 3; ++k) {
                const Located* v = get(tau_keys[k]);
                if (!v) {
                    v = get(edge_keys[k]);
                }
                if (!v) {
                    v = get("preset");
                }
                where = v ? v->line : 0;
                (void)tau_to_theta(t.edges[k], p.tau[k]);
            }
            where = 0;
            validate(t);
            cfg.truth = make_model(t, p);
            validate(*cfg.truth);
        } catch (const std::exception& e) {
            throw ParseError(source, where, 0, std::string("truth: ") + e.what());
        }
    }
    return cfg;
}

RunConfig read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, 0, "cannot open file");
    }
    return parse_config(in, path.string());
}

NaturalParams resolve_start(const StartValues& s, std::span<const StudyData> data, const ModelTemplate& t) {
    NaturalParams p = default_start(data, t);
    for (std::size_t k = 0; k < 3; ++k) {
        if (s.pi[k]) {
            p.pi[k] = *s.pi[k];
        }
        if (s.delta[k]) {
            p.delta[k] = *s.delta[k];
        }
        if (s.tau[k]) {
            (void)tau_to_theta(t.edges[k], *s.tau[k]);
            p.tau[k] = *s.tau[k];
        }
    }
    return p;
}

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json template_json(const ModelTemplate& t) {
    ordered_json j;
    j["margin"] = to_string(t.margin);
    j["link"] = to_string(t.link);
    j["permutation"] = to_string(t.permutation);
    j["edges"] = {to_string(t.edges[0]), to_string(t.edges[1]), to_string(t.edges[2])};
    j["truncated"] = t.truncated;
    j["label"] = display_label(t);
    return j;
}

ordered_json fit_json(const FitResult& f) {
    const ModelTemplate& t = f.model_template;
    const auto names = parameter_names(t);
    const auto est = flatten(f.estimates);
    const auto se = flatten(f.standard_errors);
    ordered_json j;
    j["schema"] = "trivine.fit/1";
    j["model"] = template_json(t);
    j["n_studies"] = f.n_studies;
    j["n_q"] = f.n_q;
    j["log_lik"] = number_or_null(f.log_lik);
    j["converged"] = f.converged;
    ordered_json e = ordered_json::object();
    ordered_json s = ordered_json::object();
    for (std::size_t k = 0; k < 9; ++k) {
        if (k >= 6 && !t.edge_free(static_cast<int>(k) - 6)) {
            continue;
        }
        e[names[k]] = number_or_null(est[k]);
        s[names[k]] = number_or_null(se[k]);
    }
    j["estimates"] = e;
    j["standard_errors"] = s;
    ordered_json dep = ordered_json::array();
    const auto labels = edge_labels(t.permutation);
    const std::array<const BivariateCopula*, 3> edges{&f.model.vine.edge_a, &f.model.vine.edge_b,
                                                      &f.model.vine.edge_cond};
    for (std::size_t k = 0; k < 3; ++k) {
        dep.push_back({{"edge", labels[k]},
                       {"family", to_string(edges[k]->family)},
                       {"tau", number_or_null(f.estimates.tau[k])},
                       {"theta", number_or_null(edges[k]->theta)},
                       {"free", t.edge_free(static_cast<int>(k))}});
    }
    j["dependence"] = dep;
    ordered_json d;
    d["iterations"] = f.iterations;
    d["evaluations"] = f.evaluations;
    d["starts_used"] = f.starts_used;
    d["se_available"] = f.se_available;
    d["parameter_count"] = t.parameter_count();
    ordered_json z = ordered_json::array();
    for (Eigen::Index i = 0; i < f.argmin.size(); ++i) {
        z.push_back(number_or_null(f.argmin[i]));
    }
    d["argmin"] = z;
    j["diagnostics"] = d;
    return j;
}

double json_real(const ordered_json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::string fit_to_json(const FitResult& fit) { return fit_json(fit).dump(2) + "\n"; }

FitResult fit_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (j.value("schema", std::string()) != "trivine.fit/1") {
            throw std::invalid_argument("unsupported schema (expected trivine.fit/1)");
        }
        const ordered_json& m = j.at("model");
        FitResult f;
        ModelTemplate& t = f.model_template;
        t.margin = parse_margin_family(m.at("margin").get<std::string>());
        t.link = parse_link(m.at("link").get<std::string>());
        t.permutation = parse_permutation(m.at("permutation").get<std::string>());
        for (std::size_t k = 0; k < 3; ++k) {
            t.edges[k] = parse_family(m.at("edges").at(k).get<std::string>());
        }
        t.truncated = m.at("truncated").get<bool>();
        t.label = m.value("label", std::string());
        validate(t);
        const auto names = parameter_names(t);
        const ordered_json& est = j.at("estimates");
        const ordered_json& se = j.at("standard_errors");
        std::array<double, 9> e{};
        std::array<double, 9> s{};
        for (std::size_t k = 0; k < 9; ++k) {
            const bool free = k < 6 || t.edge_free(static_cast<int>(k) - 6);
            e[k] = free ? json_real(est.at(names[k])) : 0.0;
            s[k] = free && se.contains(names[k]) ? json_real(se.at(names[k])) : kNaN;
        }
        for (std::size_t k = 0; k < 3; ++k) {
            f.estimates.pi[k] = e[k];
            f.estimates.delta[k] = e[k + 3];
            f.estimates.tau[k] = e[k + 6];
            f.standard_errors.pi[k] = s[k];
            f.standard_errors.delta[k] = s[k + 3];
            f.standard_errors.tau[k] = s[k + 6];
        }
        f.model = make_model(t, f.estimates);
        f.log_lik = json_real(j.at("log_lik"));
        f.converged = j.at("converged").get<bool>();
        f.n_studies = j.value("n_studies", std::size_t{0});
        f.n_q = j.value("n_q", std::size_t{15});
        if (j.contains("diagnostics")) {
            const ordered_json& d = j["diagnostics"];
            f.iterations = d.value("iterations", 0);
            f.evaluations = d.value("evaluations", 0);
            f.starts_used = d.value("starts_used", 1);
            f.se_available = d.value("se_available", false);
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed fit JSON: ") + e.what());
    }
}

std::string scan_to_json(const std::vector<ScanEntry>& entries, std::span<const ModelTemplate> candidates) {
    ordered_json j;
    j["schema"] = "trivine.scan/1";
    ordered_json rows = ordered_json::array();
    std::size_t rank = 0;
    for (const ScanEntry& e : entries) {
        ordered_json r;
        r["rank"] = ++rank;
        r["candidate"] = e.candidate;
        r["status"] = to_string(e.status);
        r["best"] = e.best;
        r["model"] = template_json(candidates[e.candidate]);
        if (!e.message.empty()) {
            r["message"] = e.message;
        }
        if (e.result) {
            r["fit"] = fit_json(*e.result);
        }
        rows.push_back(r);
    }
    j["results"] = rows;
    return j.dump(2) + "\n";
}

void write_scan_csv(std::ostream& os, const std::vector<ScanEntry>& entries, std::span<const ModelTemplate> candidates) {
    os << "rank,candidate,margin,link,permutation,copula,status,best,log_lik";
    const char* cols[9] = {"pi1", "pi2", "pi3", "delta1", "delta2", "delta3", "tau_a", "tau_b", "tau_cond"};
    for (const char* c : cols) {
        os << ',' << c << ',' << c << "_se";
    }
    os << '\n';
    auto fmt = [](double v) {
        if (!std::isfinite(v)) {
            return std::string("NA");
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    std::size_t rank = 0;
    for (const ScanEntry& e : entries) {
        const ModelTemplate& t = candidates[e.candidate];
        os << ++rank << ',' << e.candidate << ',' << to_string(t.margin) << ',' << to_string(t.link) << ','
           << csv_field(to_string(t.permutation)) << ',' << csv_field(display_label(t)) << ',' << to_string(e.status)
           << ',' << (e.best ? "yes" : "no") << ',' << (e.result ? fmt(e.result->log_lik) : "NA");
        std::array<double, 9> est{};
        std::array<double, 9> se{};
        est.fill(kNaN);
        se.fill(kNaN);
        if (e.result) {
            est = flatten(e.result->estimates);
            se = flatten(e.result->standard_errors);
        }
        for (std::size_t k = 0; k < 9; ++k) {
            const bool free = k < 6 || t.edge_free(static_cast<int>(k) - 6);
            os << ',' << (free ? fmt(est[k]) : "NA") << ',' << (free ? fmt(se[k]) : "NA");
        }
        os << '\n';
    }
}

}  // namespace trivine
