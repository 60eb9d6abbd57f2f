#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdp/conjugate.hpp"
#include "hdp/dataset.hpp"
#include "hdp/sampler.hpp"
#include "hdp/synth.hpp"

namespace hdp {

/// Thrown for malformed input files or configuration. The CLI maps it to
/// the usage exit code.
class InputError : public Error {
 public:
    using Error::Error;
};

/// Everything a `fit` or `generate --config` run needs, read from one JSON
/// document.
struct RunConfig {
    std::string family = "gamma-poisson";  // or "normal-gamma"
    double gamma = 1.0;
    double alpha0 = 1.0;
    GammaPoissonParams gp;
    NormalGammaParams ng;
    SamplerConfig sampler;
    int chains = 1;
    std::filesystem::path input;
    std::filesystem::path output_dir = "hdp-out";
    std::vector<std::size_t> group_sizes;  // forward sampling only

    ObsKind kind() const;
    HdpModel<GammaPoisson> gp_model() const { return {gamma, alpha0, GammaPoisson{gp}}; }
    HdpModel<NormalGamma> ng_model() const { return {gamma, alpha0, NormalGamma{ng}}; }
    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
/// Relative input/output paths are resolved against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_json(const RunConfig& config);

/// JSON lines, one observation per line: {"group": "<key>", "value": <int>}
/// for counts or {"group": "<key>", "value": [<number>, ...]} for vectors.
/// Groups are indexed by first appearance.
GroupedDataset parse_dataset(std::istream& in, ObsKind kind);
GroupedDataset parse_dataset(const std::filesystem::path& path, ObsKind kind);

void write_dataset(const GroupedDataset& data, std::ostream& out);
void write_dataset(const GroupedDataset& data, const std::filesystem::path& path);

/// Sidecar with the generating seating and dish parameters.
void write_ground_truth(const ForwardSample<double>& sample, const std::filesystem::path& path);
void write_ground_truth(const ForwardSample<NormalAtom>& sample, const std::filesystem::path& path);
void write_ground_truth(const Scenario& scenario, const std::filesystem::path& path);

/// Writes assignments.jsonl, trace.csv, summary.json (and snapshots.jsonl
/// when the trace has snapshots) into `dir`, using canonical ids.
template <class Family>
void write_results(const ChainResult<Family>& result, const GroupedDataset& data, const HdpModel<Family>& model,
                   const RunConfig& config, std::uint64_t chain_index, const std::filesystem::path& dir);

void write_trace_csv(const ChainTrace& trace, std::ostream& out);

}  // namespace hdp
