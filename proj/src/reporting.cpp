#include "riskprec/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "riskprec/errors.hpp"

namespace riskprec {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
    throw ConfigError("config field '" + path + "': " + msg);
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) field_error(path, "expected a number, got " + j.dump());
    const double v = j.get<double>();
    if (!std::isfinite(v)) field_error(path, "must be finite");
    return v;
}

std::int64_t integer_at(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        if (j.is_number_float()) {
            const double v = j.get<double>();
            if (std::floor(v) == v && std::fabs(v) < 9e15) return static_cast<std::int64_t>(v);
        }
        field_error(path, "expected an integer, got " + j.dump());
    }
    return j.get<std::int64_t>();
}

bool bool_at(const json& j, const std::string& path) {
    if (!j.is_boolean()) field_error(path, "expected true or false, got " + j.dump());
    return j.get<bool>();
}

std::string string_at(const json& j, const std::string& path) {
    if (!j.is_string()) field_error(path, "expected a string, got " + j.dump());
    return j.get<std::string>();
}

const json& array_at(const json& j, const std::string& path) {
    if (!j.is_array()) field_error(path, "expected an array");
    if (j.empty()) field_error(path, "must not be empty");
    return j;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            field_error(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

MeasureKind parse_measure_kind(const std::string& s, const std::string& path) {
    if (s == "var") return MeasureKind::var;
    if (s == "es") return MeasureKind::es;
    if (s == "srm") return MeasureKind::srm;
    field_error(path, "unknown measure '" + s + "' (expected var, es or srm)");
}

std::string slug(const std::string& label) {
    std::string out;
    for (char c : label) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(c);
        } else if (c == '.') {
            out.push_back('p');
        } else if (c == '-') {
            out.push_back('m');
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "dist" : out;
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    // Avoid "-0.0000".
    if (std::string_view(buf) == "-0.0000") return "0.0000";
    return buf;
}

std::string param_text(double p) { return format_full(p); }

bool is_standard_normal(const DistributionSpec& d) {
    const auto* n = std::get_if<Normal>(&d);
    return n && n->mu == 0.0 && n->sigma == 1.0;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << content;
    if (!os) throw Error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* stat_title(const std::string& stat) {
    static const std::map<std::string, const char*> titles{
        {"mean", "Means"},
        {"sd", "Standard deviations"},
        {"skewness", "Skewnesses"},
        {"kurtosis", "Kurtoses"},
        {"jb_pvalue", "Jarque-Bera prob-values"},
        {"std_se", "Standardised standard errors"},
        {"ci_lb", "Lower bounds of standardised confidence intervals"},
        {"ci_ub", "Upper bounds of standardised confidence intervals"},
        {"std_se_ratio", "Ratios of standardised standard errors"},
        {"lb_ratio", "Ratios of standardised CI lower bounds"},
        {"ub_ratio", "Ratios of standardised CI upper bounds"},
        {"true_value", "Population values"},
    };
    auto it = titles.find(stat);
    return it == titles.end() ? "Values" : it->second;
}

const char* measure_title(MeasureKind k) {
    switch (k) {
        case MeasureKind::var: return "VaR";
        case MeasureKind::es: return "ES";
        case MeasureKind::srm: return "SRM";
    }
    return "?";
}

std::string_view kind_name(TableKind k) {
    switch (k) {
        case TableKind::moments: return "moments";
        case TableKind::precision: return "precision";
        case TableKind::ratio: return "ratio";
        case TableKind::histogram: return "histogram";
        case TableKind::true_values: return "true_values";
    }
    return "?";
}

std::string render_csv(const TableArtifact& t) {
    std::string out = "family,params,measure,param,n,stat,value\n";
    for (const auto& r : t.rows) {
        out += r.family + ',' + r.params + ',' + std::string(to_string(r.measure)) + ',' + param_text(r.param) + ',' +
               (r.n ? std::to_string(*r.n) : std::string()) + ',' + r.stat + ',' +
               (r.value ? format_full(*r.value) : std::string("NA")) + '\n';
    }
    return out;
}

std::string render_json(const TableArtifact& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row{{"family", r.family},     {"params", r.params}, {"measure", to_string(r.measure)},
                 {"param", r.param},       {"stat", r.stat}};
        row["n"] = r.n ? json(*r.n) : json(nullptr);
        row["value"] = r.value ? json(*r.value) : json(nullptr);
        if (!r.note.empty()) row["note"] = r.note;
        rows.push_back(std::move(row));
    }
    json doc{{"kind", kind_name(t.kind)}, {"title", t.title}, {"rows", std::move(rows)}};
    return doc.dump(2) + "\n";
}

std::string render_markdown(const TableArtifact& t) {
    std::ostringstream os;
    os << "## " << t.title << "\n";
    for (MeasureKind kind : {MeasureKind::var, MeasureKind::es, MeasureKind::srm}) {
        std::vector<const StatRecord*> rows;
        for (const auto& r : t.rows) {
            if (r.measure == kind) rows.push_back(&r);
        }
        if (rows.empty()) continue;
        os << "\n### " << measure_title(kind) << "\n";
        std::vector<std::string> stats;
        for (const auto* r : rows) {
            if (std::find(stats.begin(), stats.end(), r->stat) == stats.end()) stats.push_back(r->stat);
        }
        const char* param_name = (kind == MeasureKind::srm) ? "ARA" : "alpha";
        for (const auto& stat : stats) {
            std::vector<std::pair<std::string, double>> keys;
            std::vector<std::optional<Eigen::Index>> ns;
            for (const auto* r : rows) {
                if (r->stat != stat) continue;
                const std::pair<std::string, double> key{r->family + " " + r->params, r->param};
                if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
                if (std::find(ns.begin(), ns.end(), r->n) == ns.end()) ns.push_back(r->n);
            }
            const bool several = std::any_of(keys.begin(), keys.end(),
                                             [&](const auto& k) { return k.first != keys.front().first; });
            const bool has_note = std::any_of(rows.begin(), rows.end(),
                                              [&](const StatRecord* r) { return r->stat == stat && !r->note.empty(); });
            os << "\n**" << stat_title(stat) << "**\n\n| " << (several ? "distribution | " : "") << param_name << " |";
            for (const auto& n : ns) os << (n ? " n=" + std::to_string(*n) : std::string(" value")) << " |";
            if (has_note) os << " method |";
            os << (several ? "\n|---|---|" : "\n|---|");
            for (std::size_t i = 0; i < ns.size(); ++i) os << "---:|";
            if (has_note) os << "---|";
            os << "\n";
            for (const auto& [group, p] : keys) {
                os << "| ";
                if (several) os << group << " | ";
                os << param_text(p) << " |";
                std::string note;
                for (const auto& n : ns) {
                    auto it = std::find_if(rows.begin(), rows.end(), [&](const StatRecord* r) {
                        return r->stat == stat && r->param == p && r->n == n && r->family + " " + r->params == group;
                    });
                    if (it == rows.end()) {
                        os << "  |";
                        continue;
                    }
                    os << ' ' << ((*it)->value ? fixed4(*(*it)->value) : std::string("NA")) << " |";
                    if (!(*it)->note.empty()) note = (*it)->note;
                }
                if (has_note) os << ' ' << note << " |";
                os << "\n";
            }
        }
    }
    return os.str();
}

StatRecord base_record(const DistributionSpec& dist, const PrecisionReport& r) {
    StatRecord rec;
    rec.family = family_name(dist);
    rec.params = parameter_string(dist);
    rec.measure = r.cell.measure.kind;
    rec.param = r.cell.measure.param;
    rec.n = r.cell.n;
    return rec;
}

}  // namespace

// ------------------------------------------------------------- formats

std::string_view to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::json: return "json";
        case OutputFormat::markdown: return "markdown";
    }
    return "?";
}

std::string_view file_extension(OutputFormat f) {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::json: return "json";
        case OutputFormat::markdown: return "md";
    }
    return "txt";
}

OutputFormat parse_output_format(std::string_view s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    if (s == "markdown" || s == "md") return OutputFormat::markdown;
    throw ConfigError("unknown output format '" + std::string(s) + "' (expected csv, json or markdown)");
}

std::string format_full(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

// -------------------------------------------------------------- config

json distribution_to_json(const DistributionSpec& spec) {
    if (const auto* d = std::get_if<Normal>(&spec)) return {{"family", "normal"}, {"mu", d->mu}, {"sigma", d->sigma}};
    if (const auto* d = std::get_if<TwoPieceNormal>(&spec)) {
        return {{"family", "2pn"}, {"mu", d->mu}, {"sigma1", d->sigma1}, {"sigma2", d->sigma2}};
    }
    return {{"family", "std_t"}, {"nu", std::get<StandardizedT>(spec).nu}};
}

DistributionSpec distribution_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) field_error(path, "expected an object");
    if (!j.contains("family")) field_error(path + ".family", "missing");
    const std::string family = string_at(j.at("family"), path + ".family");
    DistributionSpec spec;
    if (family == "normal") {
        reject_unknown(j, path, {"family", "mu", "sigma", "label"});
        Normal d;
        if (j.contains("mu")) d.mu = number_at(j.at("mu"), path + ".mu");
        if (j.contains("sigma")) d.sigma = number_at(j.at("sigma"), path + ".sigma");
        if (!(d.sigma > 0.0)) field_error(path + ".sigma", "must be > 0, got " + format_full(d.sigma));
        spec = d;
    } else if (family == "2pn") {
        reject_unknown(j, path, {"family", "mu", "mean", "sigma1", "sigma2", "label"});
        if (!j.contains("sigma1")) field_error(path + ".sigma1", "missing");
        if (!j.contains("sigma2")) field_error(path + ".sigma2", "missing");
        const double s1 = number_at(j.at("sigma1"), path + ".sigma1");
        const double s2 = number_at(j.at("sigma2"), path + ".sigma2");
        if (!(s1 > 0.0)) field_error(path + ".sigma1", "must be > 0, got " + format_full(s1));
        if (!(s2 > 0.0)) field_error(path + ".sigma2", "must be > 0, got " + format_full(s2));
        if (j.contains("mu") && j.contains("mean")) field_error(path, "give either mu (mode) or mean, not both");
        if (j.contains("mean")) {
            spec = TwoPieceNormal::with_mean(number_at(j.at("mean"), path + ".mean"), s1, s2);
        } else {
            const double mu = j.contains("mu") ? number_at(j.at("mu"), path + ".mu") : 0.0;
            spec = TwoPieceNormal{mu, s1, s2};
        }
    } else if (family == "std_t") {
        reject_unknown(j, path, {"family", "nu", "label"});
        if (!j.contains("nu")) field_error(path + ".nu", "missing");
        const auto nu = integer_at(j.at("nu"), path + ".nu");
        if (nu < 5) field_error(path + ".nu", "must be >= 5 so that the kurtosis exists, got " + std::to_string(nu));
        if (nu > 1000000) field_error(path + ".nu", "too large");
        spec = StandardizedT{static_cast<int>(nu)};
    } else {
        field_error(path + ".family", "unknown family '" + family + "' (expected normal, 2pn or std_t)");
    }
    return spec;
}

std::vector<std::size_t> resolve_distribution(const RunConfig& config, const std::string& name) {
    std::vector<std::size_t> out;
    if (name.empty()) return out;
    for (std::size_t i = 0; i < config.labels.size(); ++i) {
        if (config.labels[i] == name) return {i};
    }
    if (std::all_of(name.begin(), name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        const std::size_t idx = std::stoul(name);
        if (idx < config.experiment.distributions.size()) return {idx};
    }
    for (std::size_t i = 0; i < config.experiment.distributions.size(); ++i) {
        if (family_name(config.experiment.distributions[i]) == name) out.push_back(i);
    }
    if (out.empty()) throw ConfigError("no distribution matches '" + name + "'");
    return out;
}

namespace {

std::size_t single_distribution(const RunConfig& config, const json& j, const std::string& path) {
    if (j.is_number_integer()) {
        const auto idx = j.get<std::int64_t>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= config.experiment.distributions.size()) {
            field_error(path, "distribution index out of range");
        }
        return static_cast<std::size_t>(idx);
    }
    const auto name = string_at(j, path);
    std::vector<std::size_t> found;
    try {
        found = resolve_distribution(config, name);
    } catch (const ConfigError&) {
        field_error(path, "no distribution matches '" + name + "'");
    }
    if (found.size() != 1) field_error(path, "'" + name + "' matches several distributions; use a label");
    return found.front();
}

}  // namespace

void finalize(RunConfig& config) {
    auto& exp = config.experiment;
    if (config.labels.size() > exp.distributions.size()) config.labels.resize(exp.distributions.size());
    for (std::size_t i = config.labels.size(); i < exp.distributions.size(); ++i) {
        config.labels.push_back(display_label(exp.distributions[i]));
    }
    std::set<std::string> seen_slugs;
    for (const auto& label : config.labels) {
        if (!seen_slugs.insert(slug(label)).second) {
            throw ConfigError("distribution labels must be distinct (after file-name normalisation): '" + label + "'");
        }
    }
    exp.validate();
    if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) throw ConfigError("ci_level must lie in (0,1)");
    if (static_cast<double>(exp.trials) * 0.5 * (1.0 - config.ci_level) < 1.0 - 1e-9) {
        throw ConfigError("trials too small for the requested ci_level");
    }
    if (config.default_ratios) {
        config.ratios.clear();
        const auto base = std::find_if(exp.distributions.begin(), exp.distributions.end(), is_standard_normal);
        if (base != exp.distributions.end()) {
            const auto b = static_cast<std::size_t>(base - exp.distributions.begin());
            for (std::size_t i = 0; i < exp.distributions.size(); ++i) {
                if (!std::holds_alternative<Normal>(exp.distributions[i])) config.ratios.push_back({i, b});
            }
        }
        config.default_ratios = false;
    }
    for (const auto& r : config.ratios) {
        if (r.numerator >= exp.distributions.size() || r.denominator >= exp.distributions.size()) {
            throw ConfigError("ratio refers to a missing distribution");
        }
    }
    for (const auto& h : config.histograms) {
        if (h.bins < 10) throw ConfigError("histogram bins must be >= 10");
    }
}

RunConfig default_run_config() {
    RunConfig c;
    c.labels = {"N(0,1)", "2PN", "t(5)"};
    finalize(c);
    return c;
}

RunConfig full_run_config() {
    RunConfig c;
    c.experiment.distributions = {
        Normal{0.0, 1.0}, Normal{5.0, 1.0}, Normal{0.0, 5.0}, TwoPieceNormal::with_mean(0.0, 0.65, 1.3),
        StandardizedT{5},
    };
    c.labels = {"N(0,1)", "N(5,1)", "N(0,5)", "2PN", "t(5)"};
    finalize(c);
    return c;
}

RunConfig parse_run_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(root, "",
                   {"master_seed", "trials", "sample_sizes", "alphas", "aras", "measures", "distributions",
                    "common_random_numbers", "conventions", "ci_level", "ratios", "histograms", "dump_estimates"});

    RunConfig cfg;
    auto& exp = cfg.experiment;
    if (root.contains("master_seed")) {
        const auto& s = root.at("master_seed");
        if (s.is_number_unsigned()) {
            exp.master_seed = s.get<std::uint64_t>();
        } else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) {
            exp.master_seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
        } else {
            field_error("master_seed", "expected a non-negative integer");
        }
    }
    if (root.contains("trials")) exp.trials = integer_at(root.at("trials"), "trials");
    if (root.contains("sample_sizes")) {
        exp.sample_sizes.clear();
        const auto& a = array_at(root.at("sample_sizes"), "sample_sizes");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "sample_sizes[" + std::to_string(i) + "]";
            const auto n = integer_at(a[i], path);
            if (n < 2) field_error(path, "must be >= 2");
            exp.sample_sizes.push_back(n);
        }
    }
    if (root.contains("alphas")) {
        exp.alphas.clear();
        const auto& a = array_at(root.at("alphas"), "alphas");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "alphas[" + std::to_string(i) + "]";
            const double v = number_at(a[i], path);
            if (!(v > 0.0 && v < 1.0)) field_error(path, "must lie in (0,1), got " + format_full(v));
            exp.alphas.push_back(v);
        }
    }
    if (root.contains("aras")) {
        exp.aras.clear();
        const auto& a = array_at(root.at("aras"), "aras");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "aras[" + std::to_string(i) + "]";
            const double v = number_at(a[i], path);
            if (!(v > 0.0)) field_error(path, "must be > 0, got " + format_full(v));
            exp.aras.push_back(v);
        }
    }
    if (root.contains("measures")) {
        exp.measure_kinds.clear();
        const auto& a = array_at(root.at("measures"), "measures");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "measures[" + std::to_string(i) + "]";
            exp.measure_kinds.push_back(parse_measure_kind(string_at(a[i], path), path));
        }
    }
    if (root.contains("distributions")) {
        exp.distributions.clear();
        const auto& a = array_at(root.at("distributions"), "distributions");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "distributions[" + std::to_string(i) + "]";
            exp.distributions.push_back(distribution_from_json(a[i], path));
            cfg.labels.push_back(a[i].contains("label") ? string_at(a[i].at("label"), path + ".label")
                                                        : display_label(exp.distributions.back()));
        }
    } else {
        cfg.labels = {"N(0,1)", "2PN", "t(5)"};
    }
    if (root.contains("common_random_numbers")) {
        exp.common_random_numbers = bool_at(root.at("common_random_numbers"), "common_random_numbers");
    }
    if (root.contains("conventions")) {
        const auto& c = root.at("conventions");
        if (c.is_string()) {
            try {
                exp.conventions = parse_conventions(c.get<std::string>());
            } catch (const ConfigError& e) {
                field_error("conventions", e.what());
            }
        } else if (c.is_object()) {
            reject_unknown(c, "conventions", {"es_tail", "srm_weighting"});
            EstimatorConventions conv = EstimatorConventions::exact();
            if (c.contains("es_tail")) {
                const auto v = string_at(c.at("es_tail"), "conventions.es_tail");
                if (v == "top_m") {
                    conv.es_tail = EsTail::top_m;
                } else if (v == "top_m_plus_one") {
                    conv.es_tail = EsTail::top_m_plus_one;
                } else {
                    field_error("conventions.es_tail", "expected top_m or top_m_plus_one");
                }
            }
            if (c.contains("srm_weighting")) {
                const auto v = string_at(c.at("srm_weighting"), "conventions.srm_weighting");
                if (v == "bin_integral") {
                    conv.srm_weighting = SrmWeighting::bin_integral;
                } else if (v == "density_point") {
                    conv.srm_weighting = SrmWeighting::density_point;
                } else {
                    field_error("conventions.srm_weighting", "expected bin_integral or density_point");
                }
            }
            exp.conventions = conv;
        } else {
            field_error("conventions", "expected a name or an object");
        }
    }
    if (root.contains("ci_level")) cfg.ci_level = number_at(root.at("ci_level"), "ci_level");
    if (root.contains("dump_estimates")) cfg.dump_estimates = bool_at(root.at("dump_estimates"), "dump_estimates");
    if (root.contains("ratios")) {
        cfg.default_ratios = false;
        const auto& a = root.at("ratios");
        if (!a.is_array()) field_error("ratios", "expected an array");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "ratios[" + std::to_string(i) + "]";
            if (!a[i].is_object()) field_error(path, "expected an object");
            reject_unknown(a[i], path, {"numerator", "denominator"});
            if (!a[i].contains("numerator")) field_error(path + ".numerator", "missing");
            if (!a[i].contains("denominator")) field_error(path + ".denominator", "missing");
            cfg.ratios.push_back({single_distribution(cfg, a[i].at("numerator"), path + ".numerator"),
                                  single_distribution(cfg, a[i].at("denominator"), path + ".denominator")});
        }
    }
    if (root.contains("histograms")) {
        const auto& a = root.at("histograms");
        if (!a.is_array()) field_error("histograms", "expected an array");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto path = "histograms[" + std::to_string(i) + "]";
            const auto& h = a[i];
            if (!h.is_object()) field_error(path, "expected an object");
            reject_unknown(h, path, {"distribution", "measure", "param", "n", "bins"});
            HistogramRequest req;
            if (h.contains("distribution")) {
                req.selector.dist_indices = {single_distribution(cfg, h.at("distribution"), path + ".distribution")};
            }
            if (h.contains("measure")) {
                req.selector.measure = parse_measure_kind(string_at(h.at("measure"), path + ".measure"), path + ".measure");
            }
            if (h.contains("param")) req.selector.param = number_at(h.at("param"), path + ".param");
            if (h.contains("n")) req.selector.n = integer_at(h.at("n"), path + ".n");
            if (h.contains("bins")) req.bins = static_cast<int>(integer_at(h.at("bins"), path + ".bins"));
            if (req.bins < 10) field_error(path + ".bins", "must be >= 10");
            cfg.histograms.push_back(req);
        }
    }
    finalize(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text);
}

json to_json(const RunConfig& config) {
    const auto& exp = config.experiment;
    json dists = json::array();
    for (std::size_t i = 0; i < exp.distributions.size(); ++i) {
        json d = distribution_to_json(exp.distributions[i]);
        d["label"] = config.labels.at(i);
        dists.push_back(std::move(d));
    }
    json measures = json::array();
    for (auto k : exp.measure_kinds) measures.push_back(to_string(k));
    json conv{{"es_tail", exp.conventions.es_tail == EsTail::top_m ? "top_m" : "top_m_plus_one"},
              {"srm_weighting",
               exp.conventions.srm_weighting == SrmWeighting::bin_integral ? "bin_integral" : "density_point"}};
    json ratios = json::array();
    for (const auto& r : config.ratios) {
        ratios.push_back({{"numerator", config.labels.at(r.numerator)}, {"denominator", config.labels.at(r.denominator)}});
    }
    json hist = json::array();
    for (const auto& h : config.histograms) {
        json j{{"bins", h.bins}};
        if (h.selector.dist_indices.size() == 1) j["distribution"] = config.labels.at(h.selector.dist_indices.front());
        if (h.selector.measure) j["measure"] = to_string(*h.selector.measure);
        if (h.selector.param) j["param"] = *h.selector.param;
        if (h.selector.n) j["n"] = *h.selector.n;
        hist.push_back(std::move(j));
    }
    return {{"master_seed", exp.master_seed},
            {"trials", exp.trials},
            {"sample_sizes", exp.sample_sizes},
            {"alphas", exp.alphas},
            {"aras", exp.aras},
            {"measures", measures},
            {"distributions", dists},
            {"common_random_numbers", exp.common_random_numbers},
            {"conventions", conv},
            {"ci_level", config.ci_level},
            {"ratios", ratios},
            {"histograms", hist},
            {"dump_estimates", config.dump_estimates}};
}

EstimatorConventions parse_conventions(std::string_view name) {
    if (name == "exact") return EstimatorConventions::exact();
    if (name == "classic") return EstimatorConventions::classic();
    throw ConfigError("unknown conventions '" + std::string(name) + "' (expected exact or classic)");
}

void apply_overrides(RunConfig& config, const GridOverrides& o) {
    auto& exp = config.experiment;
    if (o.seed) exp.master_seed = *o.seed;
    if (o.trials) exp.trials = *o.trials;
    if (!o.measures.empty()) exp.measure_kinds = o.measures;
    if (!o.alphas.empty()) exp.alphas = o.alphas;
    if (!o.aras.empty()) exp.aras = o.aras;
    if (!o.sample_sizes.empty()) exp.sample_sizes = o.sample_sizes;
    if (o.conventions) exp.conventions = parse_conventions(*o.conventions);
    if (o.common_random_numbers) exp.common_random_numbers = *o.common_random_numbers;
    finalize(config);
}

// -------------------------------------------------------------- tables

TableArtifact moments_table(const std::string& label, const DistributionSpec& dist,
                            const std::vector<PrecisionReport>& reports) {
    TableArtifact t{TableKind::moments, "moments_" + slug(label),
                    "Moments of risk estimators under " + label, {}};
    for (const auto& r : reports) {
        auto rec = base_record(dist, r);
        const std::pair<const char*, std::optional<double>> stats[] = {
            {"mean", r.mean}, {"sd", r.sd}, {"skewness", r.skewness}, {"kurtosis", r.kurtosis},
            {"jb_pvalue", r.jb_pvalue}};
        for (const auto& [name, value] : stats) {
            rec.stat = name;
            rec.value = value;
            t.rows.push_back(rec);
        }
    }
    return t;
}

TableArtifact precision_table(const std::string& label, const DistributionSpec& dist,
                              const std::vector<PrecisionReport>& reports) {
    const double level = reports.empty() ? 0.90 : reports.front().ci_level;
    std::ostringstream title;
    title << "Precision of risk estimators under " << label << " (standardised SE and " << format_full(100.0 * level)
          << "% confidence bounds)";
    TableArtifact t{TableKind::precision, "precision_" + slug(label), title.str(), {}};
    for (const auto& r : reports) {
        auto rec = base_record(dist, r);
        const std::pair<const char*, double> stats[] = {
            {"std_se", r.std_se}, {"ci_lb", r.std_ci.lb}, {"ci_ub", r.std_ci.ub}};
        for (const auto& [name, value] : stats) {
            rec.stat = name;
            rec.value = value;
            t.rows.push_back(rec);
        }
    }
    return t;
}

TableArtifact ratio_table(const std::string& num_label, const DistributionSpec& num, const std::string& den_label,
                          const DistributionSpec& den, const std::vector<RatioEntry>& entries) {
    TableArtifact t{TableKind::ratio, "ratio_" + slug(num_label) + "_over_" + slug(den_label),
                    "Ratios of precision statistics: " + num_label + " / " + den_label, {}};
    for (const auto& e : entries) {
        StatRecord rec;
        rec.family = family_name(num) + "/" + family_name(den);
        rec.params = parameter_string(num) + "|" + parameter_string(den);
        rec.measure = e.measure.kind;
        rec.param = e.measure.param;
        rec.n = e.n;
        const std::pair<const char*, std::optional<double>> stats[] = {
            {"std_se_ratio", e.std_se}, {"lb_ratio", e.lb}, {"ub_ratio", e.ub}};
        for (const auto& [name, value] : stats) {
            rec.stat = name;
            rec.value = value;
            t.rows.push_back(rec);
        }
    }
    return t;
}

TableArtifact true_values_table(const RunConfig& config) {
    TableArtifact t{TableKind::true_values, "true_values", "Population risk measures", {}};
    const auto measures = config.experiment.measures();
    for (std::size_t i = 0; i < config.experiment.distributions.size(); ++i) {
        const auto& dist = config.experiment.distributions[i];
        for (const auto& m : measures) {
            const TrueRiskValue v = true_value(dist, m);
            StatRecord rec;
            rec.family = family_name(dist);
            rec.params = parameter_string(dist);
            rec.measure = m.kind;
            rec.param = m.param;
            rec.stat = "true_value";
            rec.value = v.value;
            rec.note = std::string(to_string(v.method));
            t.rows.push_back(rec);
        }
    }
    return t;
}

std::string render(const TableArtifact& table, OutputFormat format) {
    switch (format) {
        case OutputFormat::csv: return render_csv(table);
        case OutputFormat::json: return render_json(table);
        case OutputFormat::markdown: return render_markdown(table);
    }
    return {};
}

// ----------------------------------------------------------- histogram

Histogram make_histogram(const Eigen::VectorXd& values, int bins) {
    if (bins < 10) throw DomainError("histogram needs at least 10 bins");
    if (values.size() < 4) throw DomainError("histogram needs at least 4 values");
    Histogram h;
    h.moments = moment_stats(values);
    double lo = values.minCoeff();
    double hi = values.maxCoeff();
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = (b == bins) ? hi : lo + b * width;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        auto b = static_cast<int>(std::floor((values[i] - lo) / width));
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

std::string render_histogram(const Histogram& h, const std::string& title, OutputFormat format) {
    auto opt = [](const std::optional<double>& v) { return v ? format_full(*v) : std::string("NA"); };
    std::ostringstream os;
    switch (format) {
        case OutputFormat::csv:
            os << "# " << title << "\n# skewness=" << opt(h.moments.skewness) << "\n# kurtosis="
               << opt(h.moments.kurtosis) << "\nbin_left,bin_right,count\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                os << format_full(h.edges[b]) << ',' << format_full(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
            }
            break;
        case OutputFormat::json: {
            json bins = json::array();
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                bins.push_back({{"bin_left", h.edges[b]}, {"bin_right", h.edges[b + 1]}, {"count", h.counts[b]}});
            }
            json doc{{"kind", "histogram"}, {"title", title}, {"bins", bins}};
            doc["skewness"] = h.moments.skewness ? json(*h.moments.skewness) : json(nullptr);
            doc["kurtosis"] = h.moments.kurtosis ? json(*h.moments.kurtosis) : json(nullptr);
            os << doc.dump(2) << "\n";
            break;
        }
        case OutputFormat::markdown:
            os << "## " << title << "\n\ns = "
               << (h.moments.skewness ? fixed4(*h.moments.skewness) : std::string("NA"))
               << ", k = " << (h.moments.kurtosis ? fixed4(*h.moments.kurtosis) : std::string("NA"))
               << "\n\n| bin_left | bin_right | count |\n|---:|---:|---:|\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                os << "| " << fixed4(h.edges[b]) << " | " << fixed4(h.edges[b + 1]) << " | " << h.counts[b] << " |\n";
            }
            break;
    }
    return os.str();
}

std::vector<CellMatch> match_cells(const RunConfig& config, const CellSelector& sel) {
    std::vector<CellMatch> out;
    const auto measures = config.experiment.measures();
    for (std::size_t d = 0; d < config.experiment.distributions.size(); ++d) {
        if (!sel.dist_indices.empty() &&
            std::find(sel.dist_indices.begin(), sel.dist_indices.end(), d) == sel.dist_indices.end()) {
            continue;
        }
        for (Eigen::Index n : config.experiment.sample_sizes) {
            if (sel.n && *sel.n != n) continue;
            for (const auto& m : measures) {
                if (sel.measure && *sel.measure != m.kind) continue;
                if (sel.param && std::fabs(*sel.param - m.param) > 1e-12 * std::max(1.0, std::fabs(m.param))) continue;
                out.push_back({d, m, n});
            }
        }
    }
    return out;
}

// ------------------------------------------------------------ commands

namespace {

std::string cell_text(const RunConfig& config, const CellMatch& c) {
    return config.labels.at(c.dist_index) + " " + std::string(to_string(c.measure.kind)) + "(" +
           format_full(c.measure.param) + ") n=" + std::to_string(c.n);
}

RunConfig load_or_default(const std::optional<std::filesystem::path>& path) {
    return path ? load_run_config(*path) : default_run_config();
}

std::string histogram_stem(const RunConfig& config, const CellMatch& c) {
    return "histogram_" + slug(config.labels.at(c.dist_index)) + "_" + std::string(to_string(c.measure.kind)) + "_" +
           slug(format_full(c.measure.param)) + "_n" + std::to_string(c.n);
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = load_or_default(options.config);
        apply_overrides(config, options.overrides);
        if (options.dump_estimates) config.dump_estimates = true;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    const auto formats = options.formats.empty()
                             ? std::vector<OutputFormat>{OutputFormat::csv, OutputFormat::json, OutputFormat::markdown}
                             : options.formats;
    const auto& exp = config.experiment;
    const unsigned threads = resolve_threads(options.threads);
    try {
        std::filesystem::create_directories(options.out);
        const auto start = std::chrono::steady_clock::now();
        const ExperimentResult result = run_experiment(exp, threads);

        std::vector<std::string> written;
        auto emit = [&](const TableArtifact& t) {
            for (auto f : formats) {
                const auto name = t.name + "." + std::string(file_extension(f));
                write_file(options.out / name, render(t, f));
                written.push_back(name);
            }
        };

        std::vector<std::vector<PrecisionReport>> grids;
        for (std::size_t d = 0; d < exp.distributions.size(); ++d) {
            grids.push_back(precision_grid(result, d, config.ci_level));
            emit(moments_table(config.labels[d], exp.distributions[d], grids.back()));
            emit(precision_table(config.labels[d], exp.distributions[d], grids.back()));
        }
        for (const auto& r : config.ratios) {
            emit(ratio_table(config.labels[r.numerator], exp.distributions[r.numerator], config.labels[r.denominator],
                             exp.distributions[r.denominator], ratio_report(grids[r.numerator], grids[r.denominator])));
        }
        for (const auto& req : config.histograms) {
            for (const auto& c : match_cells(config, req.selector)) {
                const auto& te = result.at(c.dist_index, c.n, c.measure);
                const Histogram h = make_histogram(te.values(), req.bins);
                for (auto f : formats) {
                    const auto name = histogram_stem(config, c) + "." + std::string(file_extension(f));
                    write_file(options.out / name, render_histogram(h, cell_text(config, c), f));
                    written.push_back(name);
                }
            }
        }
        if (config.dump_estimates) {
            for (std::size_t d = 0; d < exp.distributions.size(); ++d) {
                std::string csv = "family,params,n,measure,param,trial,estimate\n";
                const std::string prefix = family_name(exp.distributions[d]) + "," + parameter_string(exp.distributions[d]) + ",";
                for (const auto& te : result.cells) {
                    if (te.cell.dist_index != d) continue;
                    const std::string cell_prefix = prefix + std::to_string(te.cell.n) + "," +
                                                    std::string(to_string(te.cell.measure.kind)) + "," +
                                                    format_full(te.cell.measure.param) + ",";
                    for (Eigen::Index t = 0; t < te.size(); ++t) {
                        csv += cell_prefix + std::to_string(t) + "," + format_full(te.estimates.value(t)) + "\n";
                    }
                }
                const auto name = "estimates_" + slug(config.labels[d]) + ".csv";
                write_file(options.out / name, csv);
                written.push_back(name);
            }
        }

        json manifest;
        manifest["tool"] = "riskprec";
        manifest["version"] = kVersion;
        manifest["config"] = to_json(config);
        json dists = json::array();
        for (std::size_t d = 0; d < exp.distributions.size(); ++d) {
            const Moments m = analytic_moments(exp.distributions[d]);
            dists.push_back({{"label", config.labels[d]},
                             {"spec", distribution_to_json(exp.distributions[d])},
                             {"analytic_moments",
                              {{"mean", m.mean}, {"variance", m.variance}, {"skewness", m.skewness}, {"kurtosis", m.kurtosis}}}});
        }
        manifest["distributions"] = dists;
        manifest["conventions"] = exp.conventions.name();
        manifest["cells"] = result.cells.size();
        manifest["outputs"] = written;
        write_file(options.out / "manifest.json", manifest.dump(2) + "\n");

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json printed = manifest;
        printed["threads"] = threads;
        printed["wall_time_seconds"] = wall;
        printed["output_dir"] = options.out.string();
        out << printed.dump(2) << "\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_true_values(const TrueValuesOptions& options, std::ostream& out, std::ostream& err) {
    try {
        RunConfig config = load_or_default(options.config);
        apply_overrides(config, options.overrides);
        const std::string text = render(true_values_table(config), options.format);
        if (options.out) {
            write_file(*options.out, text);
        } else {
            out << text;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_histogram(const HistogramOptions& options, std::ostream& out, std::ostream& err) {
    try {
        RunConfig config = load_or_default(options.config);
        apply_overrides(config, options.overrides);
        if (options.bins < 10) throw ConfigError("--bins must be >= 10");
        CellSelector sel = options.selector;
        if (!options.distribution.empty()) sel.dist_indices = resolve_distribution(config, options.distribution);
        const auto matches = match_cells(config, sel);
        if (matches.empty()) throw ConfigError("selector matches no cell");
        if (matches.size() > 1) {
            std::ostringstream msg;
            msg << "selector is ambiguous; it matches " << matches.size() << " cells:";
            for (const auto& c : matches) msg << "\n  " << cell_text(config, c);
            throw ConfigError(msg.str());
        }
        const auto& c = matches.front();
        const auto cell = run_cell(config.experiment, c.dist_index, c.n, {c.measure}, resolve_threads(options.threads));
        const Histogram h = make_histogram(cell.front().values(), options.bins);
        const std::string text = render_histogram(h, cell_text(config, c), options.format);
        if (options.out) {
            write_file(*options.out, text);
        } else {
            out << text;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

std::vector<double> parse_loss_text(std::string_view text) {
    std::vector<double> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '+') line.remove_prefix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
            throw ParseError("line " + std::to_string(line_no) + ": not a finite number: '" + std::string(line) + "'");
        }
        out.push_back(v);
        if (end == text.size()) break;
    }
    if (out.empty()) throw ParseError("no losses found (empty input)");
    if (out.size() < 2) throw ParseError("need at least 2 losses, found 1");
    return out;
}

int cmd_estimate(const EstimateOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const std::vector<double> losses = parse_loss_text(read_file(options.file));
        const EstimatorConventions conv = parse_conventions(options.conventions);
        const ExperimentConfig defaults;
        const auto& alphas = options.alphas.empty() ? defaults.alphas : options.alphas;
        const auto& aras = options.aras.empty() ? defaults.aras : options.aras;
        const SortedSample<double> sample(losses);
        std::ostringstream os;
        os << "measure,param,estimate\n";
        for (double a : alphas) os << "var," << format_full(a) << "," << format_full(estimate_var(sample, a)) << "\n";
        for (double a : alphas) {
            os << "es," << format_full(a) << "," << format_full(estimate_es(sample, a, conv.es_tail)) << "\n";
        }
        for (double k : aras) {
            os << "srm," << format_full(k) << "," << format_full(estimate_srm(sample, k, conv.srm_weighting)) << "\n";
        }
        out << os.str();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace riskprec
