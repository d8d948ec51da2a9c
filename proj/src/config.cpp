#include "mtm/config.hpp"

#include <fstream>
#include <sstream>

#include "mtm/errors.hpp"

namespace mtm {

namespace {

void check_keys(const Json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw config_error(ctx + ": expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw config_error(ctx + ": unknown key '" + item.key() + "'");
    }
}

const Json& require(const Json& j, const std::string& ctx, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw config_error(ctx + ": missing key '" + key + "'");
    return *it;
}

double as_number(const Json& j, const std::string& ctx)
{
    if (!j.is_number()) throw config_error(ctx + ": expected a number");
    return j.get<double>();
}

long as_integer(const Json& j, const std::string& ctx)
{
    if (!j.is_number_integer()) throw config_error(ctx + ": expected an integer");
    return j.get<long>();
}

std::uint64_t as_seed(const Json& j, const std::string& ctx)
{
    if (!j.is_number_unsigned() && !j.is_number_integer())
        throw config_error(ctx + ": expected an integer seed");
    return j.get<std::uint64_t>();
}

Point as_point(const Json& j, const std::string& ctx)
{
    if (!j.is_array() || j.empty()) throw config_error(ctx + ": expected a coordinate array");
    Point p;
    for (const Json& v : j) p.push_back(as_number(v, ctx));
    return p;
}

std::vector<double> as_number_list(const Json& j, const std::string& ctx)
{
    return as_point(j, ctx);
}

std::vector<int> as_int_list(const Json& j, const std::string& ctx)
{
    if (!j.is_array() || j.empty()) throw config_error(ctx + ": expected an integer array");
    std::vector<int> v;
    for (const Json& e : j) v.push_back(static_cast<int>(as_integer(e, ctx)));
    return v;
}

SensorModel parse_sensor_model(const Json& j, const std::string& ctx)
{
    check_keys(j, ctx,
               {"anchors", "observations", "noise_variance", "reference_distance", "log_base"});
    SensorModel m = SensorModel::defaults();
    if (j.contains("anchors")) {
        m.anchors.clear();
        for (const Json& a : require(j, ctx, "anchors")) m.anchors.push_back(as_point(a, ctx));
    }
    if (j.contains("observations")) m.observations = as_number_list(j["observations"], ctx);
    if (j.contains("noise_variance")) m.noise_variance = as_number(j["noise_variance"], ctx);
    if (j.contains("reference_distance"))
        m.reference_distance = as_number(j["reference_distance"], ctx);
    if (j.contains("log_base")) {
        const std::string base = j["log_base"].get<std::string>();
        if (base == "natural")
            m.log_base = LogBase::natural;
        else if (base == "base10")
            m.log_base = LogBase::base10;
        else
            throw config_error(ctx + ": log_base must be 'natural' or 'base10'");
    }
    m.validate();
    return m;
}

Json sensor_model_json(const SensorModel& m)
{
    Json j;
    j["anchors"] = m.anchors;
    j["observations"] = m.observations;
    j["noise_variance"] = m.noise_variance;
    j["reference_distance"] = m.reference_distance;
    j["log_base"] = m.log_base == LogBase::natural ? "natural" : "base10";
    return j;
}

Json box_json(const Box& b)
{
    return Json{{"lo", b.lo}, {"hi", b.hi}};
}

Box parse_box(const Json& j, const std::string& ctx)
{
    check_keys(j, ctx, {"lo", "hi"});
    Box b;
    b.lo = as_point(require(j, ctx, "lo"), ctx + ".lo");
    b.hi = as_point(require(j, ctx, "hi"), ctx + ".hi");
    if (b.lo.size() != b.hi.size()) throw config_error(ctx + ": lo/hi dimension mismatch");
    return b;
}

}  // namespace

Json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw config_error("config parse failure in " + path + ": " + e.what());
    }
}

RunSpec parse_run_spec(const Json& j)
{
    const std::string ctx = "run config";
    check_keys(j, ctx, {"target", "sampler"});

    RunSpec spec;
    Json resolved;

    const Json& jt = require(j, ctx, "target");
    const std::string type = require(jt, ctx + ".target", "type").get<std::string>();
    if (type == "sensor") {
        Json body = jt;
        body.erase("type");
        const SensorModel model = parse_sensor_model(body, ctx + ".target");
        spec.target = model.make_target();
        resolved["target"] = sensor_model_json(model);
        resolved["target"]["type"] = "sensor";
    } else if (type == "gaussian") {
        check_keys(jt, ctx + ".target", {"type", "mean", "variances"});
        const Point mean = as_point(require(jt, ctx + ".target", "mean"), ctx + ".target.mean");
        const std::vector<double> vars =
            as_number_list(require(jt, ctx + ".target", "variances"), ctx + ".target.variances");
        if (mean.size() != vars.size())
            throw config_error(ctx + ".target: mean/variances size mismatch");
        const Covariance cov = Covariance::diagonal(vars);
        spec.target.dim = mean.size();
        spec.target.known_normalizer = 1.0;
        spec.target.log_density = [mean, cov](const Point& x) {
            return gaussian_log_density(x, mean, cov);
        };
        resolved["target"] = Json{{"type", "gaussian"}, {"mean", mean}, {"variances", vars}};
    } else {
        throw config_error(ctx + ".target: unknown type '" + type + "'");
    }

    const Json& js = require(j, ctx, "sampler");
    const std::string sctx = ctx + ".sampler";
    check_keys(js, sctx,
               {"variant", "sigma", "tries", "schedule", "chain_length", "x0", "seed",
                "proposal_means", "weights", "sampling_mode", "tries_per_proposal"});

    const std::string variant = require(js, sctx, "variant").get<std::string>();
    const double sigma = as_number(require(js, sctx, "sigma"), sctx + ".sigma");
    if (!(sigma > 0.0)) throw config_error(sctx + ": sigma must be > 0");
    spec.x0 = as_point(require(js, sctx, "x0"), sctx + ".x0");
    if (spec.x0.size() != spec.target.dim)
        throw config_error(sctx + ": x0 dimension does not match the target");

    SamplerConfig& sc = spec.sampler;
    sc.chain_length = as_integer(require(js, sctx, "chain_length"), sctx + ".chain_length");
    if (sc.chain_length < 0) throw config_error(sctx + ": chain_length must be >= 0");
    sc.seed = js.contains("seed") ? as_seed(js["seed"], sctx + ".seed") : 0;

    const Covariance cov = Covariance::isotropic(spec.target.dim, sigma * sigma);

    Json rs;
    rs["variant"] = variant;
    rs["sigma"] = sigma;
    rs["chain_length"] = sc.chain_length;
    rs["x0"] = spec.x0;
    rs["seed"] = sc.seed;

    if (variant == "rw-mtm") {
        sc.variant = SamplerVariant::rw_mtm;
        sc.proposals = {Proposal::gaussian_random_walk(cov)};
        const bool has_tries = js.contains("tries");
        const bool has_schedule = js.contains("schedule");
        if (has_tries == has_schedule)
            throw config_error(sctx + ": rw-mtm needs exactly one of 'tries' or 'schedule'");
        if (has_tries) {
            sc.tries = TriesSchedule::fixed(
                static_cast<int>(as_integer(js["tries"], sctx + ".tries")));
            rs["tries"] = sc.tries.values.front();
        } else {
            sc.tries = TriesSchedule::variable(as_int_list(js["schedule"], sctx + ".schedule"));
            rs["schedule"] = sc.tries.values;
        }
    } else if (variant == "imtm") {
        sc.variant = SamplerVariant::imtm;
        if (!js.contains("proposal_means"))
            throw config_error(sctx + ": imtm needs 'proposal_means'");
        for (const Json& m : js["proposal_means"]) {
            Point mean = as_point(m, sctx + ".proposal_means");
            if (mean.size() != spec.target.dim)
                throw config_error(sctx + ": proposal mean dimension mismatch");
            sc.proposals.push_back(Proposal::gaussian_independent(std::move(mean), cov));
        }
        const std::string weights =
            js.contains("weights") ? js["weights"].get<std::string>() : "importance";
        if (weights == "importance")
            sc.weights = WeightSpec::importance();
        else if (weights == "dm-mixture")
            sc.weights = WeightSpec::dm_mixture();
        else
            throw config_error(sctx + ": weights must be 'importance' or 'dm-mixture'");
        const std::string mode =
            js.contains("sampling_mode") ? js["sampling_mode"].get<std::string>()
                                         : "per-proposal";
        if (mode == "per-proposal")
            sc.sampling_mode = ImtmSamplingMode::per_proposal;
        else if (mode == "mixture")
            sc.sampling_mode = ImtmSamplingMode::mixture;
        else
            throw config_error(sctx + ": sampling_mode must be 'per-proposal' or 'mixture'");
        sc.tries_per_proposal =
            js.contains("tries_per_proposal")
                ? static_cast<int>(as_integer(js["tries_per_proposal"], sctx))
                : 1;
        rs["proposal_means"] = js["proposal_means"];
        rs["weights"] = weights;
        rs["sampling_mode"] = mode;
        rs["tries_per_proposal"] = sc.tries_per_proposal;
    } else {
        throw config_error(sctx + ": unknown variant '" + variant + "'");
    }

    sc.validate();
    resolved["sampler"] = rs;
    spec.resolved = resolved;
    return spec;
}

ExperimentSpec parse_experiment_spec(const Json& j)
{
    const std::string ctx = "experiment config";
    check_keys(j, ctx, {"model", "experiment"});

    ExperimentSpec spec;
    spec.config.model = j.contains("model") ? parse_sensor_model(j["model"], ctx + ".model")
                                            : SensorModel::defaults();

    const Json& je = require(j, ctx, "experiment");
    const std::string ectx = ctx + ".experiment";
    check_keys(je, ectx,
               {"schemes", "sigma_grid", "n_grid", "runs", "chain_length", "start",
                "master_seed", "posterior_mean", "imtm_means", "tries_per_proposal"});

    for (const Json& s : require(je, ectx, "schemes"))
        spec.config.schemes.push_back(scheme_from_name(s.get<std::string>()));
    spec.config.sigma_grid =
        as_number_list(require(je, ectx, "sigma_grid"), ectx + ".sigma_grid");
    spec.config.n_grid = as_int_list(require(je, ectx, "n_grid"), ectx + ".n_grid");
    spec.config.runs = static_cast<int>(as_integer(require(je, ectx, "runs"), ectx + ".runs"));
    spec.config.chain_length =
        as_integer(require(je, ectx, "chain_length"), ectx + ".chain_length");
    spec.config.master_seed =
        je.contains("master_seed") ? as_seed(je["master_seed"], ectx + ".master_seed") : 0;

    const Json& jstart = require(je, ectx, "start");
    check_keys(jstart, ectx + ".start", {"mode", "point", "box"});
    const std::string mode = require(jstart, ectx + ".start", "mode").get<std::string>();
    if (mode == "fixed") {
        spec.config.start =
            StartMode::at(as_point(require(jstart, ectx + ".start", "point"), ectx + ".start"));
    } else if (mode == "uniform") {
        spec.config.start = StartMode::uniform_box(
            parse_box(require(jstart, ectx + ".start", "box"), ectx + ".start.box"));
    } else {
        throw config_error(ectx + ".start: mode must be 'fixed' or 'uniform'");
    }

    if (je.contains("posterior_mean"))
        spec.config.posterior_mean = as_point(je["posterior_mean"], ectx + ".posterior_mean");
    if (je.contains("imtm_means"))
        for (const Json& m : je["imtm_means"])
            spec.config.imtm_means.push_back(as_point(m, ectx + ".imtm_means"));

    spec.config.validate();

    Json resolved;
    resolved["model"] = sensor_model_json(spec.config.model);
    Json re;
    Json scheme_names = Json::array();
    for (Scheme s : spec.config.schemes) scheme_names.push_back(scheme_name(s));
    re["schemes"] = scheme_names;
    re["sigma_grid"] = spec.config.sigma_grid;
    re["n_grid"] = spec.config.n_grid;
    re["runs"] = spec.config.runs;
    re["chain_length"] = spec.config.chain_length;
    re["master_seed"] = spec.config.master_seed;
    if (spec.config.start.uniform)
        re["start"] = Json{{"mode", "uniform"}, {"box", box_json(spec.config.start.box)}};
    else
        re["start"] = Json{{"mode", "fixed"}, {"point", spec.config.start.fixed}};
    if (spec.config.posterior_mean) re["posterior_mean"] = *spec.config.posterior_mean;
    if (!spec.config.imtm_means.empty()) re["imtm_means"] = spec.config.imtm_means;
    resolved["experiment"] = re;
    spec.resolved = resolved;
    return spec;
}

namespace {

DiscreteSpace bundled_space()
{
    // Symmetric circulant proposal, strictly positive target.
    const std::vector<double> target{0.34, 0.08, 0.20, 0.26, 0.12};
    const std::vector<double> base{0.4, 0.2, 0.1, 0.1, 0.2};
    std::vector<std::vector<double>> rows(5, std::vector<double>(5));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) rows[i][(i + k) % 5] = base[k];
    return DiscreteSpace::line(target, rows);
}

std::vector<std::vector<double>> bundled_imtm_pmfs()
{
    return {{0.40, 0.30, 0.10, 0.10, 0.10}, {0.05, 0.15, 0.30, 0.30, 0.20}};
}

std::vector<OracleCase> bundled_cases()
{
    std::vector<OracleCase> cases;
    for (int n : {1, 2, 3}) {
        OracleCase c;
        c.variant = OracleCase::Variant::rw;
        c.tries = n;
        c.label = "rw-mtm N=" + std::to_string(n);
        cases.push_back(std::move(c));
    }
    {
        OracleCase c;
        c.variant = OracleCase::Variant::rw_mixture;
        c.schedule = {1, 2};
        c.label = "rw-mtm variable N in {1,2}";
        cases.push_back(std::move(c));
    }
    const auto pmfs = bundled_imtm_pmfs();
    const std::pair<DiscreteWeightKind, const char*> kinds[] = {
        {DiscreteWeightKind::importance, "imtm importance"},
        {DiscreteWeightKind::dm_mixture, "imtm dm-mixture"},
        {DiscreteWeightKind::liu_lambda, "imtm liu-lambda"},
    };
    for (const auto& [kind, label] : kinds) {
        OracleCase c;
        c.variant = OracleCase::Variant::imtm;
        c.weights = kind;
        c.proposal_pmfs = pmfs;
        c.label = label;
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace

OracleSpec parse_oracle_spec(const Json& j)
{
    const std::string ctx = "oracle config";
    check_keys(j, ctx, {"space", "cases", "tolerance", "term_guard"});

    OracleSpec spec;
    if (j.contains("space")) {
        const Json& sp = j["space"];
        check_keys(sp, ctx + ".space", {"target_pmf", "proposal_pmf"});
        spec.space = DiscreteSpace::line(
            as_number_list(require(sp, ctx + ".space", "target_pmf"), ctx + ".space"),
            [&] {
                std::vector<std::vector<double>> rows;
                for (const Json& row : require(sp, ctx + ".space", "proposal_pmf"))
                    rows.push_back(as_number_list(row, ctx + ".space.proposal_pmf"));
                return rows;
            }());
    } else {
        spec.space = bundled_space();
    }
    if (j.contains("tolerance")) spec.tolerance = as_number(j["tolerance"], ctx + ".tolerance");
    if (j.contains("term_guard")) spec.term_guard = as_number(j["term_guard"], ctx);

    if (j.contains("cases")) {
        int counter = 0;
        for (const Json& jc : j["cases"]) {
            const std::string cctx = ctx + ".cases[" + std::to_string(counter++) + "]";
            check_keys(jc, cctx,
                       {"variant", "tries", "schedule", "weights", "proposal_pmfs", "perturb",
                        "label"});
            OracleCase c;
            const std::string variant = require(jc, cctx, "variant").get<std::string>();
            if (variant == "rw-mtm") {
                c.variant = OracleCase::Variant::rw;
                if (jc.contains("tries"))
                    c.tries = static_cast<int>(as_integer(jc["tries"], cctx + ".tries"));
            } else if (variant == "rw-mixture") {
                c.variant = OracleCase::Variant::rw_mixture;
                c.schedule = as_int_list(require(jc, cctx, "schedule"), cctx + ".schedule");
            } else if (variant == "imtm") {
                c.variant = OracleCase::Variant::imtm;
                const std::string w = jc.contains("weights")
                                          ? jc["weights"].get<std::string>()
                                          : "importance";
                if (w == "importance")
                    c.weights = DiscreteWeightKind::importance;
                else if (w == "dm-mixture")
                    c.weights = DiscreteWeightKind::dm_mixture;
                else if (w == "liu-lambda")
                    c.weights = DiscreteWeightKind::liu_lambda;
                else
                    throw config_error(cctx + ": unknown weights '" + w + "'");
                if (jc.contains("proposal_pmfs")) {
                    for (const Json& row : jc["proposal_pmfs"])
                        c.proposal_pmfs.push_back(as_number_list(row, cctx + ".proposal_pmfs"));
                } else {
                    c.proposal_pmfs = bundled_imtm_pmfs();
                }
            } else {
                throw config_error(cctx + ": unknown variant '" + variant + "'");
            }
            if (jc.contains("perturb")) c.perturb = as_number(jc["perturb"], cctx + ".perturb");
            c.label = jc.contains("label") ? jc["label"].get<std::string>()
                                           : variant + " case " + std::to_string(counter);
            spec.cases.push_back(std::move(c));
        }
    } else {
        spec.cases = bundled_cases();
    }

    Json resolved;
    resolved["space"] =
        Json{{"target_pmf", spec.space.target_pmf}, {"proposal_pmf", spec.space.proposal_pmf}};
    resolved["tolerance"] = spec.tolerance;
    resolved["term_guard"] = spec.term_guard;
    Json case_list = Json::array();
    for (const OracleCase& c : spec.cases) {
        Json cj;
        switch (c.variant) {
            case OracleCase::Variant::rw:
                cj["variant"] = "rw-mtm";
                cj["tries"] = c.tries;
                break;
            case OracleCase::Variant::rw_mixture:
                cj["variant"] = "rw-mixture";
                cj["schedule"] = c.schedule;
                break;
            case OracleCase::Variant::imtm:
                cj["variant"] = "imtm";
                cj["weights"] = c.weights == DiscreteWeightKind::importance ? "importance"
                                : c.weights == DiscreteWeightKind::dm_mixture ? "dm-mixture"
                                                                              : "liu-lambda";
                cj["proposal_pmfs"] = c.proposal_pmfs;
                break;
        }
        if (c.perturb != 0.0) cj["perturb"] = c.perturb;
        cj["label"] = c.label;
        case_list.push_back(std::move(cj));
    }
    resolved["cases"] = case_list;
    spec.resolved = resolved;
    return spec;
}

GridSpec parse_grid_spec(const Json& j)
{
    const std::string ctx = "grid config";
    check_keys(j, ctx, {"model", "grid"});

    GridSpec spec;
    spec.model = j.contains("model") ? parse_sensor_model(j["model"], ctx + ".model")
                                     : SensorModel::defaults();
    if (j.contains("grid")) {
        const Json& jg = j["grid"];
        check_keys(jg, ctx + ".grid", {"box", "resolution", "reference"});
        if (jg.contains("box")) spec.box = parse_box(jg["box"], ctx + ".grid.box");
        if (jg.contains("resolution"))
            spec.resolution =
                static_cast<int>(as_integer(jg["resolution"], ctx + ".grid.resolution"));
        if (jg.contains("reference"))
            spec.reference = as_point(jg["reference"], ctx + ".grid.reference");
    }
    if (spec.resolution < 2) throw config_error(ctx + ": resolution must be >= 2");

    Json resolved;
    resolved["model"] = sensor_model_json(spec.model);
    Json jg;
    jg["box"] = box_json(spec.box);
    jg["resolution"] = spec.resolution;
    if (spec.reference) jg["reference"] = *spec.reference;
    resolved["grid"] = jg;
    spec.resolved = resolved;
    return spec;
}

Json make_manifest(const std::string& command, const Json& resolved_config,
                   std::uint64_t master_seed, double duration_seconds)
{
    Json m;
    m["command"] = command;
    m["config"] = resolved_config;
    m["master_seed"] = master_seed;
    m["artifact_version"] = kArtifactVersion;
    m["duration_seconds"] = duration_seconds;
    return m;
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

}  // namespace mtm
