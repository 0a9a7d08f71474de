#include "clocktree/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clocktree/errors.hpp"
#include "json.hpp"

namespace clocktree {

std::string fmt17(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

using nlohmann::json;

std::string int_list(const std::vector<int>& xs) {
    std::string s = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(xs[i]);
    }
    return s + "]";
}

std::string dbl_list(const std::vector<double>& xs) {
    std::string s = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += fmt17(xs[i]);
    }
    return s + "]";
}

std::string interval_obj(const Interval& iv) {
    return "{\"estimate\":" + fmt17(iv.estimate) + ",\"lo\":" + fmt17(iv.lo) +
           ",\"hi\":" + fmt17(iv.hi) + "}";
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    try {
        c.q = j.at("q").get<int>();
        c.d = j.at("d").get<int>();
        c.beta = j.at("beta").get<double>();
        c.ubar = j.at("ubar").get<std::vector<double>>();
        c.A = j.at("A").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw ModelError(std::string("config missing model fields: ") + e.what());
    }
    if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
    if (j.contains("depth")) c.depth = j["depth"].get<int>();
    if (j.contains("samples")) c.samples = j["samples"].get<int64_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("gamma_sizes")) c.gamma_sizes = j["gamma_sizes"].get<std::vector<int>>();
    if (j.contains("t_grid")) c.t_grid = j["t_grid"].get<std::vector<double>>();
    if (j.contains("a")) c.a = j["a"].get<int>();
    if (j.contains("branch_n")) c.branch_n = j["branch_n"].get<int>();
    if (j.contains("kappa")) c.kappa = j["kappa"].get<int>();
    if (j.contains("radius")) c.radius = j["radius"].get<int>();
    if (j.contains("gamma_size")) c.gamma_size = j["gamma_size"].get<int>();
    if (j.contains("distances")) c.distances = j["distances"].get<std::vector<int>>();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string chain_spec_to_json(const ChainSpec& spec) {
    std::string s = "{\"A\":" + int_list(spec.A) + ",\"pi\":" + dbl_list(spec.pi) + ",\"P\":[";
    for (size_t i = 0; i < spec.P.size(); ++i) {
        if (i) s += ",";
        s += dbl_list(spec.P[i]);
    }
    s += "],\"lambda2\":" + fmt17(spec.lambda2) + ",\"residual\":" + fmt17(spec.residual) +
         "}";
    return s;
}

ChainSpec chain_spec_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("chain spec parse error: ") + e.what());
    }
    ChainSpec spec;
    spec.A = j.at("A").get<std::vector<int>>();
    spec.pi = j.at("pi").get<std::vector<double>>();
    spec.P = j.at("P").get<std::vector<std::vector<double>>>();
    spec.lambda2 = j.at("lambda2").get<double>();
    spec.residual = j.at("residual").get<double>();
    const int q = spec.q();
    spec.log_pi.resize(q);
    for (int i = 0; i < q; ++i) spec.log_pi[i] = std::log(spec.pi[i]);
    spec.log_P.assign(q, std::vector<double>(q));
    for (int i = 0; i < q; ++i)
        for (int jj = 0; jj < q; ++jj) spec.log_P[i][jj] = std::log(spec.P[i][jj]);
    return spec;
}

std::string localization_report_to_json(const LocalizationReport& rep,
                                        const ConstantsBundle& bundle) {
    std::string s = "{";
    s += "\"epsilon\":" + fmt17(rep.epsilon);
    s += ",\"eta\":" + fmt17(rep.eta);
    s += ",\"conditioned\":" + std::string(rep.conditioned ? "true" : "false");
    s += ",\"all_pass\":" + std::string(rep.all_pass ? "true" : "false");
    s += ",\"bounds\":[";
    for (size_t i = 0; i < rep.bounds.size(); ++i) {
        const auto& b = rep.bounds[i];
        if (i) s += ",";
        s += "{\"name\":\"" + b.name + "\",\"lhs\":" + fmt17(b.lhs) +
             ",\"rhs\":" + fmt17(b.rhs) +
             ",\"side\":\"" + (b.lower_side ? "lower" : "upper") + "\"" +
             ",\"pass\":" + (b.pass ? "true" : "false") +
             ",\"margin\":" + fmt17(b.margin) + "}";
    }
    s += "],\"constants\":{";
    s += "\"n\":" + std::to_string(bundle.n);
    s += ",\"rho\":" + fmt17(bundle.rho) + ",\"eta\":" + fmt17(bundle.eta) +
         ",\"eta0\":" + fmt17(bundle.eta0);
    s += ",\"C1\":" + fmt17(bundle.C1) + ",\"C2\":" + fmt17(bundle.C2) +
         ",\"C3\":" + fmt17(bundle.C3) + ",\"C4\":" + fmt17(bundle.C4) +
         ",\"C5\":" + fmt17(bundle.C5);
    s += ",\"c1\":" + fmt17(bundle.c1) + ",\"c2\":" + fmt17(bundle.c2) +
         ",\"c3\":" + fmt17(bundle.c3) + ",\"c4\":" + fmt17(bundle.c4) +
         ",\"c5\":" + fmt17(bundle.c5);
    s += ",\"delta0\":" + fmt17(bundle.delta0) + ",\"c\":" + fmt17(bundle.c) +
         ",\"c_tilde\":" + fmt17(bundle.c_tilde) +
         ",\"lambda_beta\":" + fmt17(bundle.lambda_beta) +
         ",\"eps1\":" + fmt17(bundle.eps1) + ",\"eps2\":" + fmt17(bundle.eps2) +
         ",\"f_beta\":" + fmt17(bundle.f_beta);
    s += ",\"lambda_positive\":" + std::string(bundle.lambda_positive ? "true" : "false");
    s += ",\"eps2_vacuous\":" + std::string(bundle.eps2_vacuous ? "true" : "false");
    s += "}}";
    return s;
}

std::string badprob_report_to_json(const BadProbReport& rep) {
    std::string s = "{\"experiment\":\"badprob\"";
    s += ",\"gamma_size\":" + std::to_string(rep.gamma_size);
    s += ",\"delta0\":" + fmt17(rep.delta0);
    s += ",\"samples\":" + std::to_string(rep.samples);
    s += ",\"seed\":" + std::to_string(rep.seed);
    s += ",\"hits\":" + std::to_string(rep.hits);
    s += ",\"estimate\":" + interval_obj(rep.estimate);
    s += ",\"lemma31_bound\":" + fmt17(rep.lemma31_bound);
    s += ",\"lambda_positive\":" + std::string(rep.lambda_positive ? "true" : "false");
    s += ",\"pass\":" + std::string(rep.pass ? "true" : "false");
    s += "}";
    return s;
}

std::string reconstruction_report_to_json(const ReconstructionReport& rep,
                                          const ControlDecayReport* control) {
    std::string s = "{\"experiment\":\"reconstruct\"";
    s += ",\"a\":" + std::to_string(rep.a);
    s += ",\"a_in_A\":" + std::string(rep.a_in_A ? "true" : "false");
    s += ",\"depth\":" + std::to_string(rep.depth);
    s += ",\"samples\":" + std::to_string(rep.samples);
    s += ",\"seed\":" + std::to_string(rep.seed);
    s += ",\"eps1\":" + fmt17(rep.eps1);
    s += ",\"bound\":" + fmt17(rep.bound);
    s += ",\"bound_vacuous\":" + std::string(rep.bound_vacuous ? "true" : "false");
    s += ",\"failures\":" + std::to_string(rep.failures);
    s += ",\"failure_freq\":" + interval_obj(rep.failure_freq);
    s += ",\"tv_depth_change\":" + fmt17(rep.tv_depth_change);
    s += ",\"pass\":" + std::string(rep.pass ? "true" : "false");
    if (control) {
        s += ",\"control\":{\"a\":" + std::to_string(control->a);
        s += ",\"min_depth\":" + std::to_string(control->min_depth);
        s += ",\"max_depth\":" + std::to_string(control->max_depth);
        s += ",\"samples\":" + std::to_string(control->samples);
        s += ",\"seed\":" + std::to_string(control->seed);
        s += ",\"mean_posterior\":" + dbl_list(control->mean_posterior);
        s += ",\"strictly_decreasing\":" +
             std::string(control->strictly_decreasing ? "true" : "false") + "}";
    }
    s += "}";
    return s;
}

std::string ea_report_to_json(const EaReport& rep) {
    std::string s = "{\"experiment\":\"ea\"";
    s += ",\"depth\":" + std::to_string(rep.depth);
    s += ",\"samples\":" + std::to_string(rep.samples);
    s += ",\"seed\":" + std::to_string(rep.seed);
    s += ",\"estimate\":" + fmt17(rep.estimate);
    s += ",\"jackknife_se\":" + fmt17(rep.jackknife_se);
    s += ",\"ci\":" + interval_obj(rep.ci);
    s += ",\"lower_bound\":" + fmt17(rep.lower_bound);
    s += ",\"positive\":" + std::string(rep.positive ? "true" : "false");
    s += "}";
    return s;
}

std::string overlap_report_to_json(const OverlapReport& rep) {
    std::string s = "{\"experiment\":\"overlap\"";
    s += ",\"n\":" + std::to_string(rep.n);
    s += ",\"spacings\":" + int_list(rep.spacings);
    s += ",\"tube_depth\":" + std::to_string(rep.tube_depth);
    s += ",\"samples\":" + std::to_string(rep.samples);
    s += ",\"seed\":" + std::to_string(rep.seed);
    s += ",\"same_mean\":" + interval_obj(rep.same_mean);
    s += ",\"same_bound\":" + fmt17(rep.same_bound);
    s += ",\"same_pass\":" + std::string(rep.same_pass ? "true" : "false");
    s += ",\"pair_mean\":" + interval_obj(rep.pair_mean);
    s += ",\"pair_target\":" + fmt17(rep.pair_target);
    s += ",\"pair_pass\":" + std::string(rep.pair_pass ? "true" : "false");
    s += "}";
    return s;
}

std::string covariance_report_to_json(const CovarianceReport& rep) {
    std::string s = "{\"experiment\":\"covdecay\"";
    s += ",\"distances\":" + int_list(rep.distances);
    s += ",\"radius\":" + std::to_string(rep.radius);
    s += ",\"delta0\":" + fmt17(rep.delta0);
    s += ",\"samples\":" + std::to_string(rep.samples);
    s += ",\"seed\":" + std::to_string(rep.seed);
    s += ",\"contours_per_site\":" + std::to_string(rep.contours_per_site);
    s += ",\"variance\":" + fmt17(rep.variance);
    s += ",\"points\":[";
    for (size_t i = 0; i < rep.points.size(); ++i) {
        const auto& p = rep.points[i];
        if (i) s += ",";
        s += "{\"distance\":" + std::to_string(p.distance) +
             ",\"mean_u\":" + fmt17(p.mean_u) + ",\"mean_v\":" + fmt17(p.mean_v) +
             ",\"cov\":" + fmt17(p.cov) + "}";
    }
    s += "],\"slope\":" + fmt17(rep.slope);
    s += ",\"slope_valid\":" + std::string(rep.slope_valid ? "true" : "false");
    s += "}";
    return s;
}

std::string bound_chain_csv(const std::vector<BoundChainRow>& rows) {
    std::string s =
        "gamma_size,t,exact_p,markov_bound,coarse_bound,propagation_bound,lemma31_bound,"
        "vacuous,at_tstar\n";
    for (const auto& r : rows) {
        s += std::to_string(r.gamma_size) + "," + fmt17(r.t) + ",";
        s += r.has_exact ? fmt17(r.exact_p) : std::string("");
        s += "," + fmt17(r.markov_bound) + "," + fmt17(r.coarse_bound) + "," +
             fmt17(r.propagation_bound) + "," + fmt17(r.lemma31_bound) + ",";
        s += (r.vacuous ? "1" : "0");
        s += ",";
        s += (r.at_tstar ? "1" : "0");
        s += "\n";
    }
    return s;
}

}  // namespace clocktree
