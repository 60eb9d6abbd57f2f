#include "hdp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hdp {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index c = 0; c < v.size(); ++c) a.push_back(v(c));
    return a;
}

json seating_json(const CrfSeating& s) {
    return {{"table_of", s.table_of}, {"dish_of_table", s.dish_of_table}, {"num_dishes", s.num_dishes}};
}

const char* init_name(InitMode m) { return m == InitMode::AllTogether ? "all-together" : "all-singleton"; }
const char* scan_name(ScanOrder s) { return s == ScanOrder::Fixed ? "fixed" : "shuffled"; }

template <class T>
T get_as(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

ObsKind RunConfig::kind() const {
    if (family == "gamma-poisson") return ObsKind::Count;
    if (family == "normal-gamma") return ObsKind::RealVector;
    throw InputError("unknown family '" + family + "'");
}

void RunConfig::validate() const {
    try {
        const ObsKind k = kind();
        if (!(gamma > 0.0) || !(alpha0 > 0.0)) throw InputError("gamma and alpha0 must be positive");
        if (k == ObsKind::Count) gp.validate();
        else ng.validate();
        sampler.validate();
        if (chains < 1) throw InputError("chains must be >= 1");
        for (auto n : group_sizes) {
            if (n == 0) throw InputError("group_sizes entries must be positive");
        }
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(e.what());
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    static const std::set<std::string> known = {
        "family", "gamma",  "alpha0",         "alpha",      "beta",      "mu0",       "kappa0",
        "alpha0_ng", "beta0", "sweeps",       "burn_in",    "chains",    "seed",      "snapshot_every",
        "init_mode", "scan_order", "input",   "output_dir", "group_sizes"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw InputError("unknown config field '" + key + "'");
    }

    RunConfig c;
    if (doc.contains("family")) c.family = get_as<std::string>(doc, "family");
    if (doc.contains("gamma")) c.gamma = get_as<double>(doc, "gamma");
    if (doc.contains("alpha0")) c.alpha0 = get_as<double>(doc, "alpha0");
    if (doc.contains("alpha")) c.gp.alpha = get_as<double>(doc, "alpha");
    if (doc.contains("beta")) c.gp.beta = get_as<double>(doc, "beta");
    if (doc.contains("mu0")) {
        const auto mu = get_as<std::vector<double>>(doc, "mu0");
        c.ng.mu0 = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    }
    if (doc.contains("kappa0")) c.ng.kappa0 = get_as<double>(doc, "kappa0");
    if (doc.contains("alpha0_ng")) c.ng.alpha0 = get_as<double>(doc, "alpha0_ng");
    if (doc.contains("beta0")) c.ng.beta0 = get_as<double>(doc, "beta0");
    if (doc.contains("sweeps")) c.sampler.sweeps = get_as<int>(doc, "sweeps");
    if (doc.contains("burn_in")) c.sampler.burn_in = get_as<int>(doc, "burn_in");
    if (doc.contains("chains")) c.chains = get_as<int>(doc, "chains");
    if (doc.contains("seed")) c.sampler.rng_seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("snapshot_every")) c.sampler.snapshot_every = get_as<int>(doc, "snapshot_every");
    if (doc.contains("init_mode")) {
        const auto m = get_as<std::string>(doc, "init_mode");
        if (m == "all-together") c.sampler.init_mode = InitMode::AllTogether;
        else if (m == "all-singleton") c.sampler.init_mode = InitMode::AllSingleton;
        else throw InputError("init_mode must be all-together or all-singleton");
    }
    if (doc.contains("scan_order")) {
        const auto s = get_as<std::string>(doc, "scan_order");
        if (s == "shuffled") c.sampler.scan_order = ScanOrder::ShuffledPerSweep;
        else if (s == "fixed") c.sampler.scan_order = ScanOrder::Fixed;
        else throw InputError("scan_order must be shuffled or fixed");
    }
    if (doc.contains("input")) c.input = get_as<std::string>(doc, "input");
    if (doc.contains("output_dir")) c.output_dir = get_as<std::string>(doc, "output_dir");
    if (doc.contains("group_sizes")) c.group_sizes = get_as<std::vector<std::size_t>>(doc, "group_sizes");
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig c = parse_run_config(buf.str());
    const auto base = path.parent_path();
    if (!c.input.empty() && c.input.is_relative()) c.input = base / c.input;
    if (c.output_dir.is_relative()) c.output_dir = base / c.output_dir;
    return c;
}

std::string run_config_json(const RunConfig& c) {
    json doc = {{"family", c.family},
                {"gamma", c.gamma},
                {"alpha0", c.alpha0},
                {"sweeps", c.sampler.sweeps},
                {"burn_in", c.sampler.burn_in},
                {"chains", c.chains},
                {"seed", c.sampler.rng_seed},
                {"snapshot_every", c.sampler.snapshot_every},
                {"init_mode", init_name(c.sampler.init_mode)},
                {"scan_order", scan_name(c.sampler.scan_order)},
                {"input", c.input.generic_string()},
                {"output_dir", c.output_dir.generic_string()}};
    if (c.family == "gamma-poisson") {
        doc["alpha"] = c.gp.alpha;
        doc["beta"] = c.gp.beta;
    } else {
        doc["mu0"] = vector_json(c.ng.mu0);
        doc["kappa0"] = c.ng.kappa0;
        doc["alpha0_ng"] = c.ng.alpha0;
        doc["beta0"] = c.ng.beta0;
    }
    if (!c.group_sizes.empty()) doc["group_sizes"] = c.group_sizes;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------

GroupedDataset parse_dataset(std::istream& in, ObsKind kind) {
    std::map<std::string, std::size_t> index;
    std::vector<std::string> names;
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::vector<std::vector<double>>> vectors;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw InputError("line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("group") || !obj.contains("value")) {
            fail("expected an object with \"group\" and \"value\"");
        }
        if (!obj["group"].is_string()) fail("\"group\" must be a string");
        const auto key = obj["group"].get<std::string>();
        auto [it, inserted] = index.try_emplace(key, names.size());
        if (inserted) {
            names.push_back(key);
            counts.emplace_back();
            vectors.emplace_back();
        }
        const json& value = obj["value"];
        if (kind == ObsKind::Count) {
            if (value.is_array()) fail("vector value in a count dataset");
            if (!value.is_number_integer()) fail("count value must be an integer");
            const auto x = value.get<std::int64_t>();
            if (x < 0) fail("negative count " + std::to_string(x));
            counts[it->second].push_back(x);
        } else {
            if (!value.is_array()) fail("scalar value in a vector dataset");
            if (value.empty()) fail("empty vector");
            std::vector<double> v;
            for (const auto& e : value) {
                if (!e.is_number()) fail("vector entries must be numbers");
                v.push_back(e.get<double>());
            }
            if (dim == 0) dim = v.size();
            if (v.size() != dim) {
                fail("ragged dimension: expected " + std::to_string(dim) + ", got " + std::to_string(v.size()));
            }
            vectors[it->second].push_back(std::move(v));
        }
    }
    if (names.empty()) throw InputError("dataset is empty");
    if (kind == ObsKind::Count) return GroupedDataset::counts(std::move(counts), std::move(names));
    std::vector<Eigen::MatrixXd> groups;
    for (const auto& g : vectors) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = g[i][c];
        }
        groups.push_back(std::move(m));
    }
    return GroupedDataset::vectors(std::move(groups), std::move(names));
}

GroupedDataset parse_dataset(const std::filesystem::path& path, ObsKind kind) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset " + path.string());
    return parse_dataset(in, kind);
}

void write_dataset(const GroupedDataset& data, std::ostream& out) {
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        const std::string group = json(data.group_names()[j]).dump();
        for (std::size_t i = 0; i < data.group_size(j); ++i) {
            out << "{\"group\":" << group << ",\"value\":";
            if (data.kind() == ObsKind::Count) {
                out << data.count(j, i);
            } else {
                const auto v = data.vector(j, i);
                out << '[';
                for (Eigen::Index c = 0; c < v.size(); ++c) out << (c ? "," : "") << format_double(v(c));
                out << ']';
            }
            out << "}\n";
        }
    }
}

void write_dataset(const GroupedDataset& data, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_dataset(data, out);
}

void write_ground_truth(const ForwardSample<double>& sample, const std::filesystem::path& path) {
    json doc = seating_json(sample.seating);
    doc["family"] = "gamma-poisson";
    doc["rates"] = sample.atoms;
    open_output(path) << doc.dump(2) << '\n';
}

void write_ground_truth(const ForwardSample<NormalAtom>& sample, const std::filesystem::path& path) {
    json doc = seating_json(sample.seating);
    doc["family"] = "normal-gamma";
    json atoms = json::array();
    for (const auto& a : sample.atoms) atoms.push_back({{"mean", vector_json(a.mean)}, {"precision", a.precision}});
    doc["atoms"] = std::move(atoms);
    open_output(path) << doc.dump(2) << '\n';
}

void write_ground_truth(const Scenario& scenario, const std::filesystem::path& path) {
    json doc = {{"scenario", scenario.name},
                {"num_dishes", scenario.num_true_dishes},
                {"dish_of", scenario.true_dish},
                {"groups", scenario.data.group_names()}};
    open_output(path) << doc.dump(2) << '\n';
}

void write_trace_csv(const ChainTrace& trace, std::ostream& out) {
    out << "sweep,K,log_joint\n";
    for (std::size_t s = 0; s < trace.size(); ++s) {
        out << (s + 1) << ',' << trace.num_dishes[s] << ',' << format_double(trace.log_joint[s]) << '\n';
    }
}

namespace {

json posterior_json(const GammaPoissonParams& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

json posterior_json(const NormalGammaParams& p) {
    return {{"mu", vector_json(p.mu0)}, {"kappa", p.kappa0}, {"alpha", p.alpha0}, {"beta", p.beta0}};
}

}  // namespace

template <class Family>
void write_results(const ChainResult<Family>& result, const GroupedDataset& data, const HdpModel<Family>& model,
                   const RunConfig& config, std::uint64_t chain_index, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

    const auto& state = result.state;
    const auto canon = canonicalize(state);
    {
        auto out = open_output(dir / "assignments.jsonl");
        for (std::size_t j = 0; j < data.num_groups(); ++j) {
            const std::string group = json(data.group_names()[j]).dump();
            for (std::size_t i = 0; i < data.group_size(j); ++i) {
                out << "{\"group\":" << group << ",\"index\":" << i << ",\"table\":" << canon.table_of[j][i]
                    << ",\"dish\":" << canon.dish_of[j][i] << "}\n";
            }
        }
    }
    {
        auto out = open_output(dir / "trace.csv");
        write_trace_csv(result.trace, out);
    }
    if (!result.trace.snapshots.empty()) {
        auto out = open_output(dir / "snapshots.jsonl");
        for (const auto& snap : result.trace.snapshots) {
            out << json{{"sweep", snap.sweep}, {"table", snap.seating.table_of}, {"dish", snap.seating.dish_of}}.dump()
                << '\n';
        }
    }

    // Canonical dish id -> state dish id.
    std::vector<int> state_dish(state.num_dishes(), -1);
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        for (std::size_t i = 0; i < data.group_size(j); ++i) state_dish[canon.dish_of[j][i]] = state.dish_of(j, i);
    }
    json dishes = json::array();
    for (int k = 0; k < state.num_dishes(); ++k) {
        const auto& dish = state.dish(state_dish[k]);
        dishes.push_back({{"dish", k},
                          {"customers", dish.stats.n},
                          {"tables", dish.tables},
                          {"posterior", posterior_json(model.family.posterior(dish.stats))}});
    }
    json groups = json::object();
    for (std::size_t j = 0; j < data.num_groups(); ++j) groups[data.group_names()[j]] = j;
    json summary = {{"chain", chain_index},
                    {"seed", config.sampler.rng_seed},
                    {"sweeps", result.trace.size()},
                    {"burn_in", result.trace.burn_in},
                    {"modal_num_dishes", result.trace.modal_num_dishes()},
                    {"final_num_dishes", state.num_dishes()},
                    {"final_log_joint", result.trace.log_joint.empty() ? 0.0 : result.trace.log_joint.back()},
                    {"dishes", std::move(dishes)},
                    {"groups", std::move(groups)},
                    {"config", json::parse(run_config_json(config))}};
    open_output(dir / "summary.json") << summary.dump(2) << '\n';
}

template void write_results<GammaPoisson>(const ChainResult<GammaPoisson>&, const GroupedDataset&,
                                          const HdpModel<GammaPoisson>&, const RunConfig&, std::uint64_t,
                                          const std::filesystem::path&);
template void write_results<NormalGamma>(const ChainResult<NormalGamma>&, const GroupedDataset&,
                                         const HdpModel<NormalGamma>&, const RunConfig&, std::uint64_t,
                                         const std::filesystem::path&);

}  // namespace hdp
