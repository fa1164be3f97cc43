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


// Acceptance run: one PASS/FAIL line per criterion, full reports in
// acceptance_report.json. Exit status is 0 only if every criterion passes.
//
//   acceptance [--jobs J] [--only 1,4,5] [--report FILE]

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "rwre/rwre.hpp"

using namespace rwre;
using nlohmann::json;

namespace {

constexpr std::uint64_t kMasterSeed = 20260101;
constexpr Site kRandomLo = -8192;
constexpr Site kRandomHi = 16800;

struct Panel {
    std::string name;
    Environment env;
};

std::vector<Panel> random_panel(int R)
{
    std::vector<Panel> out;
    for (auto kind : {GeneratorKind::iid_uniform, GeneratorKind::markov_modulated})
        for (std::uint64_t s = 1; s <= 5; ++s)
            out.push_back({to_string(kind) + "/R" + std::to_string(R) + "/seed" + std::to_string(s),
                           generate(EnvironmentParams::random(kind, R, s, kRandomLo, kRandomHi))});
    return out;
}

Environment srw() { return generate(EnvironmentParams::srw(-64, 20000)); }

std::uint64_t seed_for(int criterion, std::size_t item) { return derive_seed(kMasterSeed, 1000 * criterion + item); }

struct Outcome {
    bool pass = true;
    json detail = json::array();
    std::string summary;
};

void add(Outcome& o, const std::string& label, const VerificationReport& r, bool with_meta = true)
{
    o.pass = o.pass && r.pass;
    auto j = r.to_json(with_meta);
    j["label"] = label;
    o.detail.push_back(j);
}

// 1. Conditioned laws against exhaustive path enumeration.
Outcome exact_oracles(const Thresholds& thr)
{
    Outcome o;
    double worst = 0.0;
    const std::vector<Panel> envs{{"srw", generate(EnvironmentParams::srw(-64, 256))},
                                  {"iid_uniform/R2/seed1",
                                   generate(EnvironmentParams::random(GeneratorKind::iid_uniform, 2, 1, -64, 256))}};
    for (const auto& [name, env] : envs) {
        const TransitionKernel k(env);
        for (std::size_t n = 1; n <= 10; ++n) {
            const auto surv = survival_probability(k, n);
            const double total = oracle::survival_by_enumeration(env, n);
            double err = std::abs(surv.value() - total);
            oracle::positive_paths(env, n, [&](const std::vector<Site>& path, double q) {
                double h = 1.0;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    double step = 0.0;
                    for (const auto& [y, w] : meander_step_law(k, surv.table, i, path[i]))
                        if (y == path[i + 1]) step = w;
                    h *= step;
                }
                err = std::max(err, std::abs(h - q / total));
            });
            worst = std::max(worst, err);
            o.detail.push_back({{"env", name}, {"law", "meander"}, {"n", n}, {"max_abs_error", err}});
        }
        for (Site N = 2; N <= 6; ++N) {
            const auto h = harmonic_hit(k, N);
            const double pa = oracle::crossing_by_forward_mass(env, N);
            double err = std::abs(h.crossing_probability() - pa);
            std::size_t paths = 0;
            oracle::crossing_paths(env, N, 10, [&](const std::vector<Site>& path, double q) {
                double c = 1.0;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    double step = 0.0;
                    for (const auto& [y, w] : crossing_step_law(k, h, path[i]))
                        if (y == path[i + 1]) step = w;
                    c *= step;
                }
                err = std::max(err, std::abs(c - q / pa));
                ++paths;
            });
            worst = std::max(worst, err);
            o.detail.push_back({{"env", name}, {"law", "crossing"}, {"N", N}, {"paths", paths}, {"max_abs_error", err}});
        }
    }
    o.pass = worst <= thr.exact_oracle;
    std::ostringstream s;
    s << "max abs error " << worst << " (<= " << thr.exact_oracle << ")";
    o.summary = s.str();
    return o;
}

std::string worst_of(const Outcome& o, const std::string& key, const std::string& inner = "", bool largest = true)
{
    double w = largest ? -1.0 : 1e300;
    std::string who;
    for (const auto& r : o.detail) {
        if (!r.contains("statistics") || !r["statistics"].contains(key)) continue;
        const auto& v = r["statistics"][key];
        std::vector<double> vals;
        if (v.is_number()) vals.push_back(v.get<double>());
        else
            for (const auto& e : v) vals.push_back(e.at(inner.empty() ? key : inner).get<double>());
        for (double x : vals)
            if (largest ? x > w : x < w) {
                w = x;
                who = r.at("label").get<std::string>();
            }
    }
    std::ostringstream s;
    s << (largest ? "max " : "min ") << (inner.empty() ? key : inner) << " " << w << " (" << who << ")";
    return s.str();
}

std::string failures(const Outcome& o)
{
    std::string f;
    for (const auto& r : o.detail)
        if (r.contains("pass") && !r["pass"].get<bool>()) f += (f.empty() ? "" : ", ") + r.at("label").get<std::string>();
    return f.empty() ? "" : "; failing: " + f;
}

} // namespace

int main(int argc, char** argv)
{
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::set<int> only;
    std::string report_path = "acceptance_report.json";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--jobs" && i + 1 < argc) jobs = static_cast<unsigned>(std::stoul(argv[++i]));
        else if (a == "--report" && i + 1 < argc) report_path = argv[++i];
        else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--jobs J] [--only 1,2,...] [--report FILE]\n";
            return 2;
        }
    }
    const auto run = [&](int c) { return only.empty() || only.count(c) > 0; };

    VerifyOptions opt;
    opt.jobs = jobs;
    const auto& thr = opt.thresholds;
    const Environment srw_env = srw();
    const auto panel3 = random_panel(3);
    json report{{"master_seed", kMasterSeed}, {"thresholds", thr.to_json()}, {"criteria", json::object()}};
    bool all = true;

    const auto finish = [&](int c, const std::string& title, Outcome o, double seconds) {
        all = all && o.pass;
        std::cout << "CRITERION " << c << " " << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.summary
                  << "  [" << static_cast<int>(seconds) << " s]" << std::endl;
        report["criteria"][std::to_string(c)] = {{"title", title}, {"pass", o.pass}, {"summary", o.summary}, {"detail", o.detail}};
    };
    const auto timed = [](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto o = fn();
        return std::make_pair(std::move(o), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    if (run(1)) {
        auto [o, s] = timed([&] { return exact_oracles(thr); });
        finish(1, "exact-oracle equivalence", std::move(o), s);
    }

    if (run(2)) {
        auto [o, s] = timed([&] {
            Outcome o;
            add(o, "srw", verify_rayleigh(srw_env, 4096, 20000, seed_for(2, 0), opt));
            for (std::size_t i = 0; i < panel3.size(); ++i)
                add(o, panel3[i].name, verify_rayleigh(panel3[i].env, 4096, 20000, seed_for(2, i + 1), opt));
            o.summary = worst_of(o, "ks") + "; srw <= 0.02, random <= 0.03" + failures(o);
            return o;
        });
        finish(2, "Rayleigh limit", std::move(o), s);
    }

    if (run(3)) {
        auto [o, s] = timed([&] {
            Outcome o;
            const std::vector<double> ts{0.25, 0.5, 0.75};
            add(o, "srw", verify_marginal(srw_env, 4096, ts, 20000, seed_for(3, 0), opt));
            for (std::size_t i = 0; i < panel3.size(); ++i)
                add(o, panel3[i].name, verify_marginal(panel3[i].env, 4096, ts, 20000, seed_for(3, i + 1), opt));
            o.summary = worst_of(o, "ks") + "; <= 0.03" + failures(o);
            return o;
        });
        finish(3, "meander marginals", std::move(o), s);
    }

    if (run(4)) {
        auto [o, s] = timed([&] {
            Outcome o;
            add(o, "srw", verify_ratio(srw_env, 4096, {0.25, 0.5}, opt));
            for (const auto& p : panel3) add(o, p.name, verify_ratio(p.env, 4096, {0.25, 0.5}, opt));
            o.summary = worst_of(o, "deviation") + "; srw <= 0.05, random <= 0.08" + failures(o);
            return o;
        });
        finish(4, "survival ratio", std::move(o), s);
    }

    if (run(5)) {
        auto [o, s] = timed([&] {
            Outcome o;
            const std::vector<Site> Ns{8, 16, 32, 64, 128, 256};
            add(o, "srw", verify_crossing_lemmas(srw_env, Ns, opt));
            for (const auto& p : panel3) add(o, p.name, verify_crossing_lemmas(p.env, Ns, opt));
            o.summary = worst_of(o, "N_times_P_spread") + failures(o);
            return o;
        });
        finish(5, "crossing probability and exit time lemmas", std::move(o), s);
    }

    if (run(6)) {
        auto [o, s] = timed([&] {
            Outcome o;
            const auto panel8 = random_panel(8);
            for (std::size_t i = 0; i < panel8.size(); ++i)
                add(o, panel8[i].name, verify_overshoot(panel8[i].env, {32, 64, 128}, 10000, seed_for(6, i), opt));
            o.summary = worst_of(o, "M_eta_0.05") + " (jump range 8)" + failures(o);
            return o;
        });
        finish(6, "uniform overshoot control", std::move(o), s);
    }

    if (run(7)) {
        auto [o, s] = timed([&] {
            Outcome o;
            add(o, "srw", verify_particles(srw_env, {2, 3, 4}, 3, 8, 1e5, seed_for(7, 0), opt));
            for (std::size_t i = 0; i < panel3.size(); ++i)
                add(o, panel3[i].name, verify_particles(panel3[i].env, {2, 3, 4}, 3, 8, 1e5, seed_for(7, i + 1), opt));
            o.summary = worst_of(o, "max_violation") + ", " + worst_of(o, "little_relative_gap") + failures(o);
            return o;
        });
        finish(7, "particle reversibility and Little's law", std::move(o), s);
    }

    if (run(8)) {
        auto [o, s] = timed([&] {
            Outcome o;
            add(o, "srw", verify_corollary(srw_env, 64, 10000, seed_for(8, 0), opt));
            o.summary = worst_of(o, "ks_T_rho") + ", " + worst_of(o, "mean_rho_z") + failures(o);
            return o;
        });
        finish(8, "crossing time and stopped path", std::move(o), s);
    }

    if (run(9)) {
        auto [o, s] = timed([&] {
            Outcome o;
            add(o, "continuum", verify_continuum(10000, seed_for(9, 0), opt));
            o.summary = worst_of(o, "ks_endpoint") + ", " + worst_of(o, "mass_error", "error") + failures(o);
            return o;
        });
        finish(9, "continuum self-checks", std::move(o), s);
    }

    if (run(10)) {
        auto [o, s] = timed([&] {
            Outcome o;
            VerifyOptions small = opt;
            small.sigma_fit_steps = 1024;
            small.sigma_fit_runs = 2000;
            VerifyOptions serial = small;
            serial.jobs = 1;
            const auto& iid = panel3.front().env;
            const std::vector<std::pair<std::string, std::function<VerificationReport(const VerifyOptions&)>>> checks{
                {"rayleigh", [&](const VerifyOptions& v) { return verify_rayleigh(iid, 1024, 2000, 5, v); }},
                {"marginal", [&](const VerifyOptions& v) { return verify_marginal(iid, 1024, {0.5}, 2000, 6, v); }},
                {"ratio", [&](const VerifyOptions& v) { return verify_ratio(iid, 4096, {0.25, 0.5}, v); }},
                {"lemmas", [&](const VerifyOptions& v) { return verify_crossing_lemmas(iid, {8, 16, 32}, v); }},
                {"overshoot", [&](const VerifyOptions& v) { return verify_overshoot(iid, {32}, 2000, 7, v); }},
                {"particles", [&](const VerifyOptions& v) { return verify_particles(iid, {3}, 2, 6, 1e4, 8, v); }},
                {"corollary", [&](const VerifyOptions& v) { return verify_corollary(srw_env, 32, 1000, 9, v); }},
                {"continuum", [&](const VerifyOptions& v) { return verify_continuum(1000, 10, v); }},
            };
            std::size_t identical = 0;
            for (const auto& [name, fn] : checks) {
                const auto a = fn(small).to_json(false).dump();
                const auto b = fn(small).to_json(false).dump();
                const auto c = fn(serial).to_json(false).dump();
                const bool same = a == b && a == c;
                identical += same;
                o.pass = o.pass && same;
                o.detail.push_back({{"check", name}, {"identical", same}, {"bytes", a.size()}});
            }
            o.summary = std::to_string(identical) + "/" + std::to_string(checks.size()) +
                        " reports byte-identical across repeats and thread counts";
            return o;
        });
        finish(10, "determinism", std::move(o), s);
    }

    std::ofstream(report_path) << report.dump(2) << '\n';
    std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << " (report: " << report_path << ")" << std::endl;
    return all ? 0 : 1;
}
