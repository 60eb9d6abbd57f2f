#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "hdp/cli.hpp"
#include "hdp/io.hpp"

using namespace hdp;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class TempDir {
 public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("hdp-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

 private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

GroupedDataset parse(const std::string& text, ObsKind kind) {
    std::istringstream in(text);
    return parse_dataset(in, kind);
}

std::string parse_error(const std::string& text, ObsKind kind) {
    try {
        parse(text, kind);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "hdp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("parse count datasets") {
    const auto d = parse("{\"group\":\"a\",\"value\":3}\n{\"group\":\"a\",\"value\":0}\n", ObsKind::Count);
    CHECK(d.num_groups() == 1);
    CHECK(d.group_size(0) == 2);
    CHECK(d.count(0, 0) == 3);

    const auto g = parse("{\"group\":\"b\",\"value\":1}\n\n{\"group\":\"a\",\"value\":2}\n{\"group\":\"b\",\"value\":5}\n",
                         ObsKind::Count);
    CHECK(g.group_names() == std::vector<std::string>{"b", "a"});
    CHECK(g.group_sizes() == std::vector<std::size_t>{2, 1});

    CHECK(parse_error("{\"group\":\"a\",\"value\":-1}\n", ObsKind::Count).starts_with("line 1:"));
    CHECK(parse_error("{\"group\":\"a\",\"value\":1}\n{\"group\":\"a\",\"value\":1.5}\n", ObsKind::Count)
              .starts_with("line 2:"));
    CHECK(parse_error("{\"group\":\"a\",\"value\":1}\nnot json\n", ObsKind::Count).starts_with("line 2:"));
    CHECK(parse_error("{\"group\":3,\"value\":1}\n", ObsKind::Count).starts_with("line 1:"));
    CHECK(parse_error("{\"group\":\"a\",\"value\":[1]}\n", ObsKind::Count).find("vector value") != std::string::npos);
    CHECK(parse_error("", ObsKind::Count).find("empty") != std::string::npos);
    CHECK(parse_error("\n  \n", ObsKind::Count).find("empty") != std::string::npos);
}

TEST_CASE("parse vector datasets") {
    const auto d = parse("{\"group\":\"x\",\"value\":[1.5,-2]}\n{\"group\":\"y\",\"value\":[0,3e2]}\n",
                         ObsKind::RealVector);
    CHECK(d.dim() == 2);
    CHECK(d.vector(1, 0)(1) == 300.0);

    const auto ragged = parse_error("{\"group\":\"x\",\"value\":[1,2]}\n{\"group\":\"x\",\"value\":[1,2,3]}\n",
                                    ObsKind::RealVector);
    CHECK(ragged.starts_with("line 2:"));
    CHECK(ragged.find("ragged") != std::string::npos);
    CHECK(parse_error("{\"group\":\"x\",\"value\":4}\n", ObsKind::RealVector).find("scalar value") !=
          std::string::npos);
    CHECK(parse_error("{\"group\":\"x\",\"value\":[]}\n", ObsKind::RealVector).starts_with("line 1:"));
}

TEST_CASE("write then parse reproduces the dataset") {
    Rng rng = make_rng(21);
    const auto gp = forward_sample(HdpModel<GammaPoisson>{1, 1, GammaPoisson{{0.5, 0.01}}}, {5, 3, 8}, rng);
    std::stringstream buf;
    write_dataset(gp.data, buf);
    const auto back = parse_dataset(buf, ObsKind::Count);
    REQUIRE(back.num_groups() == gp.data.num_groups());
    for (std::size_t j = 0; j < back.num_groups(); ++j) CHECK(back.count_group(j) == gp.data.count_group(j));

    NormalGammaParams prior;
    prior.mu0 = Eigen::Vector3d(0.1, -7, 1e6);
    prior.kappa0 = 0.01;
    const auto ng = forward_sample(HdpModel<NormalGamma>{1, 1, NormalGamma{prior}}, {4, 4}, rng);
    std::stringstream vbuf;
    write_dataset(ng.data, vbuf);
    const auto vback = parse_dataset(vbuf, ObsKind::RealVector);
    for (std::size_t j = 0; j < vback.num_groups(); ++j) {
        CHECK((vback.vector_group(j) - ng.data.vector_group(j)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("run configuration parsing") {
    const auto c = parse_run_config(R"({"family":"normal-gamma","mu0":[1,2],"kappa0":0.5,"alpha0_ng":2,
        "beta0":3,"gamma":0.4,"alpha0":1.5,"sweeps":10,"burn_in":2,"chains":2,"seed":9,
        "init_mode":"all-singleton","scan_order":"fixed","input":"d.jsonl"})");
    CHECK(c.kind() == ObsKind::RealVector);
    CHECK(c.ng.mu0.size() == 2);
    CHECK(c.ng.alpha0 == 2.0);
    CHECK(c.alpha0 == 1.5);
    CHECK(c.sampler.init_mode == InitMode::AllSingleton);
    CHECK(c.sampler.scan_order == ScanOrder::Fixed);
    CHECK(c.chains == 2);

    const auto again = parse_run_config(run_config_json(c));
    CHECK(again.sampler.rng_seed == 9);
    CHECK(again.ng.mu0 == c.ng.mu0);

    CHECK_THROWS_AS(parse_run_config(R"({"gama":1})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"gamma":-1})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"chains":0})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"sweeps":5,"burn_in":5})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"family":"poisson"})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"alpha":"one"})"), InputError);
    CHECK_THROWS_AS(parse_run_config("[1,2]"), InputError);
    CHECK_THROWS_AS(parse_run_config("{"), InputError);
}

TEST_CASE("result files") {
    TempDir tmp;
    const auto data = GroupedDataset::counts({{4}}, {"only"});
    RunConfig config;
    config.sampler.sweeps = 12;
    config.sampler.snapshot_every = 5;
    const auto model = config.gp_model();
    const auto result = run_chain(data, model, config.sampler);
    write_results(result, data, model, config, 0, tmp.path() / "out");

    const auto assignments = lines_of(slurp(tmp.path() / "out" / "assignments.jsonl"));
    REQUIRE(assignments.size() == 1);
    const auto a = json::parse(assignments[0]);
    CHECK(a["group"] == "only");
    CHECK(a["index"] == 0);
    CHECK(a["table"] == 0);
    CHECK(a["dish"] == 0);

    const auto trace = lines_of(slurp(tmp.path() / "out" / "trace.csv"));
    CHECK(trace.size() == 13);
    CHECK(trace[0] == "sweep,K,log_joint");
    CHECK(trace[1].starts_with("1,1,"));

    CHECK(lines_of(slurp(tmp.path() / "out" / "snapshots.jsonl")).size() == 2);

    const auto summary = json::parse(slurp(tmp.path() / "out" / "summary.json"));
    CHECK(summary["modal_num_dishes"] == 1);
    CHECK(summary["seed"] == 1);
    CHECK(summary["dishes"].size() == 1);
    CHECK(summary["dishes"][0]["posterior"]["alpha"] == 5.0);
    CHECK(summary["dishes"][0]["posterior"]["beta"] == 2.0);
    CHECK(summary["groups"]["only"] == 0);
    CHECK(summary["config"]["sweeps"] == 12);
}

TEST_CASE("command line exit codes") {
    TempDir tmp;
    std::string out, err;
    CHECK(cli({"fit", "--config", (tmp.path() / "missing.json").string()}, &out, &err) == kExitUsage);
    CHECK(err.find("cannot open config") != std::string::npos);
    CHECK(cli({}, &out, &err) == kExitUsage);
    CHECK(cli({"frobnicate"}, &out, &err) == kExitUsage);
    CHECK(cli({"validate", "--grid", "huge"}, &out, &err) == kExitUsage);
    CHECK(cli({"generate", "--out", (tmp.path() / "x.jsonl").string()}, &out, &err) == kExitUsage);
    CHECK(cli({"generate", "--scenario", "nope", "--out", (tmp.path() / "x.jsonl").string()}, &out, &err) ==
          kExitUsage);
    CHECK(cli({"--help"}, &out, &err) == kExitOk);

    spit(tmp.path() / "bad.json", R"({"input":"data.jsonl","sweeps":3})");
    CHECK(cli({"fit", "--config", (tmp.path() / "bad.json").string()}, &out, &err) == kExitUsage);
    CHECK(err.find("cannot open dataset") != std::string::npos);

    CHECK(cli({"validate", "--grid", "quick"}, &out, &err) == kExitOk);
    CHECK(out.find("FAIL") == std::string::npos);
    CHECK(out.find("PASS") != std::string::npos);
}

TEST_CASE("generate then fit from the command line") {
    TempDir tmp;
    const auto data_path = tmp.path() / "rates.jsonl";
    CHECK(cli({"generate", "--scenario", "gp-3rates", "--out", data_path.string()}) == kExitOk);
    CHECK(fs::exists(data_path.string() + ".truth.json"));
    CHECK(parse_dataset(data_path, ObsKind::Count).total_size() == 90);

    spit(tmp.path() / "fit.json", R"({"family":"gamma-poisson","alpha":1,"beta":0.05,"sweeps":30,"burn_in":10,
        "chains":2,"seed":4,"input":"rates.jsonl","output_dir":"run"})");
    CHECK(cli({"fit", "--config", (tmp.path() / "fit.json").string()}) == kExitOk);
    const auto first = slurp(tmp.path() / "run" / "chain_0" / "trace.csv");
    CHECK(lines_of(first).size() == 31);
    CHECK(fs::exists(tmp.path() / "run" / "chain_1" / "summary.json"));
    CHECK(lines_of(slurp(tmp.path() / "run" / "chain_1" / "assignments.jsonl")).size() == 90);

    CHECK(cli({"fit", "--config", (tmp.path() / "fit.json").string()}) == kExitOk);
    CHECK(slurp(tmp.path() / "run" / "chain_0" / "trace.csv") == first);

    spit(tmp.path() / "fwd.json", R"({"family":"normal-gamma","mu0":[0,0],"group_sizes":[3,4],"seed":2})");
    const auto fwd = tmp.path() / "fwd.jsonl";
    CHECK(cli({"generate", "--config", (tmp.path() / "fwd.json").string(), "--out", fwd.string()}) == kExitOk);
    const auto fwd_data = parse_dataset(fwd, ObsKind::RealVector);
    CHECK(fwd_data.dim() == 2);
    CHECK(fwd_data.total_size() == 7);
    const auto truth = json::parse(slurp(fwd.string() + ".truth.json"));
    CHECK(truth["family"] == "normal-gamma");
}
