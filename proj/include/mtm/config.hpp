#ifndef MTM_CONFIG_HPP
#define MTM_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtm/experiments.hpp"
#include "mtm/oracle.hpp"
#include "mtm/samplers.hpp"
#include "mtm/sensor.hpp"

namespace mtm {

using Json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "mtm 0.1.0";

// Reads and parses a JSON config; throws config_error with the parser's
// position diagnostics on failure. Unknown keys anywhere in the document
// are hard errors.
Json load_json_file(const std::string& path);

// Fully resolved single-chain run. `resolved` is the config with every
// default filled in, suitable for the manifest.
struct RunSpec {
    TargetDensity target;
    SamplerConfig sampler;
    Point x0;
    Json resolved;
};
RunSpec parse_run_spec(const Json& j);

struct ExperimentSpec {
    ExperimentConfig config;
    Json resolved;
};
ExperimentSpec parse_experiment_spec(const Json& j);

struct OracleCase {
    enum class Variant { rw, rw_mixture, imtm };
    Variant variant = Variant::rw;
    int tries = 2;                                   // rw
    std::vector<int> schedule;                       // rw_mixture
    DiscreteWeightKind weights = DiscreteWeightKind::importance;  // imtm
    std::vector<std::vector<double>> proposal_pmfs;  // imtm
    double perturb = 0.0;  // nonzero: negative control, breaks one entry
    std::string label;
};

struct OracleSpec {
    DiscreteSpace space;
    std::vector<OracleCase> cases;
    double tolerance = 1e-12;
    double term_guard = 1e7;
    Json resolved;
};
OracleSpec parse_oracle_spec(const Json& j);

struct GridSpec {
    SensorModel model;
    Box box{{-10.0, -10.0}, {10.0, 10.0}};
    int resolution = 400;
    std::optional<Point> reference;
    Json resolved;
};
GridSpec parse_grid_spec(const Json& j);

// Manifest emitted alongside every output file; holds everything needed
// to reproduce the output byte for byte.
Json make_manifest(const std::string& command, const Json& resolved_config,
                   std::uint64_t master_seed, double duration_seconds);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mtm

#endif  // MTM_CONFIG_HPP
