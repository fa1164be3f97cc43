/*
   Copyright 2026 The rwre Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// rwre: command-line front end.
//
// Exit codes: 0 success or passing check, 1 failed check or runtime error,
// 2 usage error. Structured output is JSON, sample streams are CSV.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rwre/rwre.hpp"

namespace {

using namespace rwre;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string env_path;
    std::string out;
    std::string out_dir;
    bool json = false;
};

std::filesystem::path resolve_output(const Common& c)
{
    std::filesystem::path p(c.out);
    if (p.is_absolute()) return p;
    std::string dir = c.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("RWRE_OUT_DIR");
        dir = env ? env : ".";
    }
    return std::filesystem::path(dir) / p;
}

// Writes text to --out when given, otherwise to stdout.
void emit(const Common& c, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    const auto path = resolve_output(c);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << text;
}

void emit_json(const Common& c, const nlohmann::json& j) { emit(c, j.dump(2) + "\n"); }

void emit_scalar(const Common& c, const std::string& name, double v, nlohmann::json extra = nlohmann::json::object())
{
    if (c.json || !c.out.empty()) {
        extra[name] = v;
        emit_json(c, extra);
    } else {
        std::cout << format_real(v) << '\n';
    }
}

Environment load_env(const Common& c)
{
    if (c.env_path.empty()) throw UsageError("--env is required");
    return read_environment(c.env_path);
}

void add_common(CLI::App* cmd, Common& c, bool env, bool seed)
{
    if (env) cmd->add_option("--env,env_file", c.env_path, "environment JSON file");
    if (seed) cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("-o,--out", c.out, "output file (relative paths resolve against the output directory)");
    cmd->add_option("--out-dir", c.out_dir, "output directory (default: $RWRE_OUT_DIR or .)");
    cmd->add_flag("--json", c.json, "print scalars as JSON");
}

// Config file: a JSON object whose keys are long flag names. Values are
// appended after the explicit arguments only for flags not already given.
std::vector<std::string> apply_config(std::vector<std::string> args)
{
    std::string path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (path.empty()) return kept;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config must be a JSON object");
    const auto given = [&](const std::string& flag) {
        for (const auto& a : kept)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) kept.push_back(flag);
            continue;
        }
        kept.push_back(flag);
        if (value.is_array()) {
            for (const auto& v : value) kept.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            kept.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return kept;
}

int report_exit(const Common& c, const VerificationReport& r)
{
    emit_json(c, r.to_json());
    return r.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random walks among random conductances: simulation, exact solves and limit-law checks"};
    app.require_subcommand(1);
    Common c;
    int exit_code = 0;

    // ---- env ---------------------------------------------------------------
    auto* env_cmd = app.add_subcommand("env", "environment generation and validation");
    env_cmd->require_subcommand(1);
    EnvironmentParams gp;
    std::string kind = "srw";
    std::vector<Site> window{-64, 4160};
    auto* env_gen = env_cmd->add_subcommand("gen", "generate an environment");
    add_common(env_gen, c, false, true);
    env_gen->add_option("--kind", kind, "iid_uniform | markov_modulated | deterministic_srw (or iid, markov, srw)");
    env_gen->add_option("--window", window, "x_min x_max")->expected(2);
    env_gen->add_option("--R", gp.R_max, "maximum jump length");
    env_gen->add_option("--kappa", gp.kappa);
    env_gen->add_option("--K", gp.K_bound);
    env_gen->add_option("--beta", gp.beta);
    env_gen->callback([&] {
        gp.generator_kind = generator_kind_from_string(kind);
        gp.x_min = window[0];
        gp.x_max = window[1];
        gp.seed = c.seed;
        const auto env = generate(gp);
        if (c.out.empty()) {
            std::cout << to_json(env).dump() << '\n';
        } else {
            const auto path = resolve_output(c);
            write_environment(env, path.string());
            std::cout << nlohmann::json{{"written", path.string()}, {"sites", env.x_max() - env.x_min() + 1}}.dump() << '\n';
        }
    });
    auto* env_val = env_cmd->add_subcommand("validate", "check Conditions E and K and the bound on C_x");
    add_common(env_val, c, true, false);
    env_val->callback([&] {
        const auto rep = validate(load_env(c));
        emit_json(c, to_json(rep));
        exit_code = rep.pass ? 0 : 1;
    });

    // ---- walk --------------------------------------------------------------
    auto* walk_cmd = app.add_subcommand("walk", "quenched walk: simulation, survival, conditioned sampling");
    walk_cmd->require_subcommand(1);
    Site start = 0;
    std::size_t steps = 1000, n = 100, m = 1, n_fit = 1024, runs = 20000;
    Site N = 16, W = 0;
    std::string table_out;

    auto* w_sim = walk_cmd->add_subcommand("simulate", "simulate one quenched path");
    add_common(w_sim, c, true, true);
    w_sim->add_option("--start", start);
    w_sim->add_option("--steps", steps);
    w_sim->callback([&] {
        const auto env = load_env(c);
        const auto path = simulate(env, start, steps, c.seed);
        std::ostringstream s;
        write_walk_csv(s, path, {{"env", env_descriptor(env)}, {"seed", c.seed}, {"start", start}, {"steps", steps}});
        emit(c, s.str());
    });

    auto* w_surv = walk_cmd->add_subcommand("survival", "P[X_k > 0, k = 1..n] by backward recursion");
    add_common(w_surv, c, true, false);
    w_surv->add_option("--n", n);
    w_surv->add_option("--window", W, "truncation window (0: default with doubling)");
    w_surv->add_option("--table-out", table_out, "binary dump of the survival table");
    w_surv->callback([&] {
        const auto res = survival_probability(load_env(c), n, W);
        if (!table_out.empty()) {
            std::ofstream f(table_out, std::ios::binary);
            write_table(f, res.table);
        }
        emit_scalar(c, "survival", res.value(),
                    {{"lower", res.lower}, {"upper", res.upper}, {"W", res.W}, {"certified", res.certified}, {"n", n}});
    });

    auto* w_mea = walk_cmd->add_subcommand("sample-meander", "exact draws from P[. | Lambda_n]");
    add_common(w_mea, c, true, true);
    w_mea->add_option("--n", n);
    w_mea->add_option("--m", m, "number of paths");
    w_mea->callback([&] {
        const auto env = load_env(c);
        const TransitionKernel kernel(env);
        const auto surv = survival_probability(kernel, n);
        std::vector<WalkPath> paths(m);
        for_each_meander(kernel, surv.table, m, c.seed, c.jobs, [&](std::size_t i, const WalkPath& p) { paths[i] = p; });
        std::ostringstream s;
        write_csv_header(s, {{"env", env_descriptor(env)}, {"seed", c.seed}, {"n", n}, {"m", m}, {"survival", surv.value()}},
                         "sample,k,x");
        for (std::size_t i = 0; i < m; ++i) write_walk_rows(s, paths[i], i);
        emit(c, s.str());
    });

    auto* w_cro = walk_cmd->add_subcommand("sample-crossing", "exact draws from P[. | tau_E < tau+_B]");
    add_common(w_cro, c, true, true);
    w_cro->add_option("--N", N);
    w_cro->add_option("--m", m, "number of paths");
    w_cro->callback([&] {
        const auto env = load_env(c);
        const TransitionKernel kernel(env);
        const auto table = harmonic_hit(kernel, N);
        std::vector<WalkPath> paths(m);
        parallel_for(m, c.jobs, [&](std::size_t i) { paths[i] = conditioned_sample_crossing(kernel, table, c.seed, i); });
        std::ostringstream s;
        write_csv_header(s,
                         {{"env", env_descriptor(env)}, {"seed", c.seed}, {"N", N}, {"m", m},
                          {"crossing_probability", table.crossing_probability()}},
                         "sample,k,x");
        for (std::size_t i = 0; i < m; ++i) write_walk_rows(s, paths[i], i);
        emit(c, s.str());
    });

    auto* w_sig = walk_cmd->add_subcommand("sigma", "diffusivity from the growth of Var(X_k)");
    add_common(w_sig, c, true, true);
    w_sig->add_option("--n-fit", n_fit);
    w_sig->add_option("--runs", runs);
    w_sig->callback([&] {
        const auto est = estimate_sigma(TransitionKernel(load_env(c)), n_fit, runs, c.seed, c.jobs);
        emit_json(c, {{"sigma", est.sigma}, {"stderr", est.stderr_}, {"n_fit", n_fit}, {"runs", runs}, {"seed", c.seed}});
    });

    // ---- net ---------------------------------------------------------------
    auto* net_cmd = app.add_subcommand("net", "reduced networks and exact electrical quantities");
    net_cmd->require_subcommand(1);
    std::string red_kind = "omega3";
    int cap = 3;
    double tol = 1e-12, horizon = 0.0, burn_in = -1.0;

    auto* n_red = net_cmd->add_subcommand("reduce", "dump omega1, omega2 or omega3 as JSON");
    add_common(n_red, c, true, false);
    n_red->add_option("--N", N);
    n_red->add_option("--kind", red_kind, "omega1 | omega2 | omega3");
    n_red->callback([&] { emit_json(c, to_json(reduce(load_env(c), N, reduction_kind_from_string(red_kind)))); });

    auto* n_ceff = net_cmd->add_subcommand("ceff", "effective conductance between 1 and N");
    add_common(n_ceff, c, true, false);
    n_ceff->add_option("--N", N);
    n_ceff->callback([&] {
        const auto env = load_env(c);
        const auto red = reduce(env, N, ReductionKind::omega3);
        emit_scalar(c, "C_eff", effective_conductance(red),
                    {{"N", N}, {"boundary_conductance", boundary_conductance(red)},
                     {"kappa_over_N_minus_1", env.params().kappa / static_cast<double>(N - 1)}});
    });

    auto* n_hit = net_cmd->add_subcommand("hitprob", "P[tau_E < tau+_B] from 0");
    add_common(n_hit, c, true, false);
    n_hit->add_option("--N", N);
    n_hit->callback([&] {
        const auto r = crossing_probability_routes(load_env(c), N);
        emit_scalar(c, "crossing_probability", r.full_window,
                    {{"N", N}, {"omega1", r.omega1}, {"reversal", r.reversal}});
    });

    auto* n_exit = net_cmd->add_subcommand("exittime", "E[tau+_B ^ tau_E] from 0");
    add_common(n_exit, c, true, false);
    n_exit->add_option("--N", N);
    n_exit->callback([&] {
        const auto env = load_env(c);
        const auto red = reduce(env, N, ReductionKind::omega3);
        emit_scalar(c, "expected_exit_time", expected_exit_time_exact(env, N),
                    {{"N", N}, {"reduced_exit_time", reduced_exit_time(red)}});
    });

    auto* n_lit = net_cmd->add_subcommand("little-bound", "(1/C3_0) sum_x C3_x");
    add_common(n_lit, c, true, false);
    n_lit->add_option("--N", N);
    n_lit->callback([&] {
        const auto red = reduce(load_env(c), N, ReductionKind::omega3);
        emit_scalar(c, "little_bound", little_bound(red), {{"N", N}, {"little_exit_bound", little_exit_bound(red)}});
    });

    auto* n_rev = net_cmd->add_subcommand("reversibility", "detailed balance of the particle system");
    add_common(n_rev, c, true, false);
    n_rev->add_option("--N", N);
    n_rev->add_option("--cap", cap, "maximum particle count");
    n_rev->add_option("--tol", tol);
    n_rev->callback([&] {
        const auto rep = check_reversibility(particle_system(reduce(load_env(c), N, ReductionKind::omega3)), cap, tol);
        auto j = to_json(rep);
        j["N"] = N;
        emit_json(c, j);
        exit_code = rep.pass ? 0 : 1;
    });

    auto* n_q = net_cmd->add_subcommand("queue", "M/G/inf queue fed at 0; Little's law");
    add_common(n_q, c, true, true);
    n_q->add_option("--N", N);
    n_q->add_option("--horizon", horizon, "simulated time (default 1e5 / lambda0)");
    n_q->add_option("--burn-in", burn_in, "discarded initial time (default horizon / 10)");
    n_q->callback([&] {
        const auto red = reduce(load_env(c), N, ReductionKind::omega3);
        const auto spec = particle_system(red);
        const double h = horizon > 0.0 ? horizon : 1e5 / spec.lambda0;
        auto j = to_json(simulate_queue(spec, h, c.seed, burn_in));
        j["N"] = N;
        j["exact_exit_time"] = reduced_exit_time(red);
        j["total_mass"] = red.total_mass();
        emit_json(c, j);
    });

    // ---- continuum ---------------------------------------------------------
    auto* con_cmd = app.add_subcommand("continuum", "reference continuum processes");
    con_cmd->require_subcommand(1);
    double dt = kMaxMeanderDt, rho_dt = kDefaultRhoDt, sigma = 1.0, t = 0.5, ymax = 5.0, scale_t = 1.0;
    std::size_t points = 501;
    bool with_path = false;

    auto* c_mea = con_cmd->add_subcommand("meander", "Brownian meander from the last zero of W");
    add_common(c_mea, c, false, true);
    c_mea->add_option("--dt", dt);
    c_mea->add_option("--t", scale_t, "emit W+_t instead of W+");
    c_mea->callback([&] {
        const auto s = sample_meander(dt, c.seed);
        std::ostringstream o;
        write_path_csv(o, scale_t == 1.0 ? s.path : meander_scaled(s.path, scale_t));
        emit(c, o.str());
    });

    auto* c_bes = con_cmd->add_subcommand("bessel", "Bessel-3 path");
    add_common(c_bes, c, false, true);
    c_bes->add_option("--dt", dt);
    c_bes->add_option("--horizon", horizon);
    c_bes->callback([&] {
        std::ostringstream o;
        write_path_csv(o, sample_bessel3(dt, horizon > 0.0 ? horizon : 1.0, c.seed));
        emit(c, o.str());
    });

    auto* c_rho = con_cmd->add_subcommand("rho1", "first passage of Bessel-3 at 1/sigma");
    add_common(c_rho, c, false, true);
    c_rho->add_option("--dt", rho_dt);
    c_rho->add_option("--sigma", sigma);
    c_rho->add_option("--m", m, "number of samples");
    c_rho->add_flag("--path", with_path, "emit the stopped path of sample 0 as CSV");
    c_rho->callback([&] {
        if (with_path) {
            const auto s = sample_rho1(rho_dt, sigma, c.seed, 0, std::nullopt, true);
            std::ostringstream o;
            write_path_csv(o, *s.path);
            emit(c, o.str());
            return;
        }
        std::vector<double> rho(m);
        parallel_for(m, c.jobs, [&](std::size_t i) { rho[i] = sample_rho1(rho_dt, sigma, c.seed, i).rho; });
        nlohmann::json j{{"dt", rho_dt}, {"sigma", sigma}, {"seed", c.seed}, {"samples", rho}};
        if (m >= 2) {
            const auto e = mean_and_stderr(rho);
            j["mean"] = e.mean;
            j["stderr"] = e.stderr_;
            j["target_mean"] = 1.0 / (3.0 * sigma * sigma);
        }
        emit_json(c, j);
    });

    auto* c_q = con_cmd->add_subcommand("qdensity", "tabulate q(t, y) and its CDF");
    add_common(c_q, c, false, false);
    c_q->add_option("--t", t);
    c_q->add_option("--ymax", ymax);
    c_q->add_option("--points", points);
    c_q->callback([&] {
        std::ostringstream o;
        write_csv_header(o, {{"t", t}, {"ymax", ymax}, {"points", points}}, "y,q,cdf");
        for (std::size_t i = 0; i < points; ++i) {
            const double y = points > 1 ? ymax * static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
            o << format_real(y) << ',' << format_real(q_density(t, y)) << ',' << format_real(meander_cdf(t, y)) << '\n';
        }
        emit(c, o.str());
    });

    // ---- verify ------------------------------------------------------------
    auto* ver_cmd = app.add_subcommand("verify", "limit-law and lemma checks; exit 1 on failure");
    ver_cmd->require_subcommand(1);
    VerifyOptions vo;
    SuiteSizes sz;
    std::vector<double> t_list{0.25, 0.5, 0.75};
    std::vector<Site> N_list;
    auto add_verify = [&](const std::string& name, const std::string& help, bool needs_env,
                          std::size_t* n_ref = nullptr, std::size_t* m_ref = nullptr) {
        auto* cmd = ver_cmd->add_subcommand(name, help);
        add_common(cmd, c, needs_env, true);
        cmd->add_option("--n", n_ref ? *n_ref : sz.n, "walk length");
        cmd->add_option("--m", m_ref ? *m_ref : sz.m, "sample count");
        cmd->add_option("--sigma-fit-steps", vo.sigma_fit_steps);
        cmd->add_option("--sigma-fit-runs", vo.sigma_fit_runs);
        return cmd;
    };

    add_verify("rayleigh", "X_n / (sigma sqrt n) given Lambda_n against Rayleigh", true)->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(c, verify_rayleigh(load_env(c), sz.n, sz.m, c.seed, vo));
    });
    auto* v_mar = add_verify("marginal", "Z^n_t given Lambda_n against int q(t, .)", true);
    v_mar->add_option("--t", t_list);
    v_mar->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(c, verify_marginal(load_env(c), sz.n, t_list, sz.m, c.seed, vo));
    });
    auto* v_rat = add_verify("ratio", "survival ratio against t^{-1/2}", true);
    v_rat->add_option("--t", t_list);
    v_rat->callback([&] { exit_code = report_exit(c, verify_ratio(load_env(c), sz.n, t_list, vo)); });
    auto* v_ov = add_verify("overshoot", "overshoot tails under the crossing conditioning", true, nullptr, &sz.overshoot_m);
    v_ov->add_option("--N", N_list, "N sweep (default 32 64 128)");
    v_ov->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(
            c, verify_overshoot(load_env(c), N_list.empty() ? sz.overshoot_N : N_list, sz.overshoot_m, c.seed, vo));
    });
    auto* v_lem = add_verify("lemmas", "crossing probability and exit time sweeps", true);
    v_lem->add_option("--N", N_list, "N sweep (default 8 .. 256)");
    v_lem->callback([&] {
        exit_code = report_exit(c, verify_crossing_lemmas(load_env(c), N_list.empty() ? sz.lemma_N : N_list, vo));
    });
    auto* v_cor = add_verify("corollary", "(T_n, Y^n) against (rho_1, B3)", true, &sz.corollary_n, &sz.corollary_m);
    v_cor->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(c, verify_corollary(load_env(c), sz.corollary_n, sz.corollary_m, c.seed, vo));
    });
    add_verify("tightness", "finite-n tightness probes", true)->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(c, verify_tightness_probe(load_env(c), sz.n, sz.m, c.seed, vo));
    });
    add_verify("continuum", "meander sampler and density self-checks", false, nullptr, &sz.continuum_m)->callback([&] {
        vo.jobs = c.jobs;
        exit_code = report_exit(c, verify_continuum(sz.continuum_m, c.seed, vo));
    });
    auto* v_all = ver_cmd->add_subcommand("all", "srw calibration, then every suite on the environment");
    add_common(v_all, c, true, true);
    v_all->add_option("--m", sz.m, "meander sample count");
    v_all->callback([&] {
        vo.jobs = c.jobs;
        const auto j = verify_all(load_env(c), c.seed, vo, sz);
        emit_json(c, j);
        exit_code = j.value("pass", false) ? 0 : 1;
    });

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        std::reverse(args.begin(), args.end());
        args = apply_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n' << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_code;
}
