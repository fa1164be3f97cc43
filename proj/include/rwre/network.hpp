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

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/env.hpp"
#include "rwre/linalg.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Finite electrical networks obtained from an environment by pruning and
// collapsing the half-lines B = (-inf, 0] and E = [N, inf). Only sites within
// R_max of the interior (0, N) interact with it, so the reductions are exact.

enum class ReductionKind { omega1, omega2, omega3 };

inline std::string to_string(ReductionKind k)
{
    switch (k) {
    case ReductionKind::omega1: return "omega1";
    case ReductionKind::omega2: return "omega2";
    case ReductionKind::omega3: return "omega3";
    }
    return "unknown";
}

inline ReductionKind reduction_kind_from_string(const std::string& s)
{
    if (s == "omega1" || s == "1") return ReductionKind::omega1;
    if (s == "omega2" || s == "2") return ReductionKind::omega2;
    if (s == "omega3" || s == "3") return ReductionKind::omega3;
    throw std::invalid_argument("unknown reduction kind: " + s);
}

struct NetworkEdge {
    Site a = 0; // a <= b; a == b is a self-loop
    Site b = 0;
    double w = 0.0;
};

/// Nodes form the contiguous range [lo, hi]. A self-loop of weight w adds 2w
/// to its node's mass and is traversed with probability 2w / mass; with this
/// convention the collapsed boundary masses equal C_B and C_E exactly.
class NetworkReduction {
public:
    NetworkReduction(ReductionKind kind, Site N, int R, Site lo, Site hi, std::vector<NetworkEdge> edges)
        : kind_(kind)
        , N_(N)
        , R_(R)
        , lo_(lo)
        , hi_(hi)
        , edges_(std::move(edges))
        , mass_(static_cast<std::size_t>(hi - lo + 1), 0.0)
        , adjacency_(mass_.size())
    {
        std::sort(edges_.begin(), edges_.end(),
                  [](const NetworkEdge& l, const NetworkEdge& r) { return l.a != r.a ? l.a < r.a : l.b < r.b; });
        for (const auto& e : edges_) {
            const auto ia = index(e.a);
            const auto ib = index(e.b);
            if (ia == ib) {
                mass_[ia] += 2.0 * e.w;
                adjacency_[ia].emplace_back(ia, 2.0 * e.w);
            } else {
                mass_[ia] += e.w;
                mass_[ib] += e.w;
                adjacency_[ia].emplace_back(ib, e.w);
                adjacency_[ib].emplace_back(ia, e.w);
            }
        }
    }

    ReductionKind kind() const { return kind_; }
    Site N() const { return N_; }
    int R() const { return R_; }
    Site lo() const { return lo_; }
    Site hi() const { return hi_; }
    std::size_t size() const { return mass_.size(); }
    Site site(std::size_t i) const { return lo_ + static_cast<Site>(i); }
    bool contains(Site x) const { return x >= lo_ && x <= hi_; }
    const std::vector<NetworkEdge>& edges() const { return edges_; }

    std::size_t index(Site x) const
    {
        if (!contains(x)) throw std::out_of_range("site " + std::to_string(x) + " not in reduction");
        return static_cast<std::size_t>(x - lo_);
    }

    double mass(Site x) const { return mass_[index(x)]; }

    /// Collapsed conductance between x and y (self-loop weight when x == y).
    double conductance(Site x, Site y) const
    {
        const Site a = std::min(x, y);
        const Site b = std::max(x, y);
        double w = 0.0;
        for (const auto& e : edges_)
            if (e.a == a && e.b == b) w += e.w;
        return w;
    }

    /// One-step transition probability of the walk on the reduced network.
    double q(Site x, Site y) const
    {
        const auto ix = index(x);
        const auto iy = index(y);
        double w = 0.0;
        for (const auto& [j, c] : adjacency_[ix])
            if (j == iy) w += c;
        return w / mass_[ix];
    }

    const std::vector<std::pair<std::size_t, double>>& neighbours(std::size_t i) const { return adjacency_[i]; }

    double total_edge_conductance() const
    {
        double s = 0.0;
        for (const auto& e : edges_) s += e.w;
        return s;
    }

    double total_mass() const
    {
        double s = 0.0;
        for (double m : mass_) s += m;
        return s;
    }

    // Boundary data inherited from omega1.
    double C_B = 0.0;
    double C_E = 0.0;
    std::vector<std::pair<Site, double>> pi_B;
    std::vector<std::pair<Site, double>> pi_E;

private:
    ReductionKind kind_;
    Site N_;
    int R_;
    Site lo_;
    Site hi_;
    std::vector<NetworkEdge> edges_;
    std::vector<double> mass_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

namespace detail {

inline void require_reduction_window(const Environment& env, Site N)
{
    if (N < 2) throw std::invalid_argument("N must be at least 2");
    if (!env.has_row(-env.R()) || !env.has_row(N + env.R() - 1))
        throw WindowError("environment window does not cover [-R_max, N + R_max]");
}

// Edges of omega1: every edge with at least one endpoint in [0, N-1].
inline std::vector<NetworkEdge> omega1_edges(const Environment& env, Site N)
{
    std::vector<NetworkEdge> edges;
    const int R = env.R();
    for (Site a = -R; a <= N - 1; ++a)
        for (int d = 1; d <= R; ++d) {
            const Site b = a + d;
            const bool keep = (a >= 0 && a <= N - 1) || (b >= 0 && b <= N - 1);
            const double w = env.edge(a, d);
            if (keep && w > 0.0) edges.push_back({a, b, w});
        }
    return edges;
}

inline void fill_boundary(NetworkReduction& red, const NetworkReduction& omega1)
{
    red.C_B = omega1.C_B;
    red.C_E = omega1.C_E;
    red.pi_B = omega1.pi_B;
    red.pi_E = omega1.pi_E;
}

} // namespace detail

inline NetworkReduction reduce(const Environment& env, Site N, ReductionKind kind)
{
    detail::require_reduction_window(env, N);
    const int R = env.R();
    const auto e1 = detail::omega1_edges(env, N);
    NetworkReduction omega1(ReductionKind::omega1, N, R, -R, N + R - 1, e1);
    for (Site x = -R; x <= 0; ++x) omega1.C_B += omega1.mass(x);
    for (Site x = N; x <= N + R - 1; ++x) omega1.C_E += omega1.mass(x);
    for (Site x = -R; x <= 0; ++x) omega1.pi_B.emplace_back(x, omega1.mass(x) / omega1.C_B);
    for (Site x = N; x <= N + R - 1; ++x) omega1.pi_E.emplace_back(x, omega1.mass(x) / omega1.C_E);
    if (kind == ReductionKind::omega1) return omega1;

    const auto in_B = [](Site x) { return x <= 0; };
    const auto in_E = [N](Site x) { return x >= N; };
    std::map<std::pair<Site, Site>, double> collapsed;
    for (const auto& e : e1) {
        Site a = e.a;
        Site b = e.b;
        if (kind == ReductionKind::omega2) {
            if (in_B(a)) a = 0;
            if (in_B(b)) b = 0;
        } else {
            if (in_B(a)) a = 0;
            if (in_B(b)) b = 0;
            if (in_E(a)) a = N;
            if (in_E(b)) b = N;
        }
        collapsed[{std::min(a, b), std::max(a, b)}] += e.w;
    }
    std::vector<NetworkEdge> edges;
    for (const auto& [key, w] : collapsed) edges.push_back({key.first, key.second, w});
    const Site hi = kind == ReductionKind::omega2 ? N + R - 1 : N;
    NetworkReduction red(kind, N, R, 0, hi, std::move(edges));
    detail::fill_boundary(red, omega1);
    return red;
}

// ---------------------------------------------------------------------------
// Exact solves on a reduction.

enum class NodeRole { free, target, avoid };

/// u(x) = P^x[hit targets before avoid-set], harmonic on free nodes.
inline std::vector<double> harmonic_measure(const NetworkReduction& red, const std::function<NodeRole(Site)>& role)
{
    const std::size_t n = red.size();
    std::vector<std::size_t> free_index(n, n);
    std::vector<std::size_t> free_nodes;
    for (std::size_t i = 0; i < n; ++i)
        if (role(red.site(i)) == NodeRole::free) {
            free_index[i] = free_nodes.size();
            free_nodes.push_back(i);
        }
    std::size_t bw = 0;
    for (std::size_t fi = 0; fi < free_nodes.size(); ++fi)
        for (const auto& [j, c] : red.neighbours(free_nodes[fi]))
            if (free_index[j] < n) bw = std::max(bw, fi > free_index[j] ? fi - free_index[j] : free_index[j] - fi);

    linalg::BandMatrix a(free_nodes.size(), bw);
    std::vector<double> b(free_nodes.size(), 0.0);
    for (std::size_t fi = 0; fi < free_nodes.size(); ++fi) {
        const std::size_t i = free_nodes[fi];
        const double m = red.mass(red.site(i));
        a.at(fi, fi) += 1.0;
        for (const auto& [j, c] : red.neighbours(i)) {
            const double p = c / m;
            if (free_index[j] < n) a.at(fi, free_index[j]) -= p;
            else if (role(red.site(j)) == NodeRole::target) b[fi] += p;
        }
    }
    const auto sol = linalg::solve(a, b);
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeRole r = role(red.site(i));
        u[i] = r == NodeRole::target ? 1.0 : r == NodeRole::avoid ? 0.0 : sol[free_index[i]];
    }
    return u;
}

/// P^x[tau_T < tau+_A]: one step from x, then the harmonic measure.
inline double escape_probability(const NetworkReduction& red, Site x, const std::function<NodeRole(Site)>& role)
{
    const auto u = harmonic_measure(red, role);
    const std::size_t i = red.index(x);
    double p = 0.0;
    for (const auto& [j, c] : red.neighbours(i)) p += c / red.mass(x) * u[j];
    return p;
}

/// E^x[tau+_A] where A is the set of nodes with role avoid (x may lie in A).
inline double expected_return_time(const NetworkReduction& red, Site x, const std::function<bool(Site)>& stop)
{
    const std::size_t n = red.size();
    std::vector<std::size_t> free_index(n, n);
    std::vector<std::size_t> free_nodes;
    for (std::size_t i = 0; i < n; ++i)
        if (!stop(red.site(i))) {
            free_index[i] = free_nodes.size();
            free_nodes.push_back(i);
        }
    std::size_t bw = 0;
    for (std::size_t fi = 0; fi < free_nodes.size(); ++fi)
        for (const auto& [j, c] : red.neighbours(free_nodes[fi]))
            if (free_index[j] < n) bw = std::max(bw, fi > free_index[j] ? fi - free_index[j] : free_index[j] - fi);
    linalg::BandMatrix a(free_nodes.size(), bw);
    for (std::size_t fi = 0; fi < free_nodes.size(); ++fi) {
        const std::size_t i = free_nodes[fi];
        a.at(fi, fi) += 1.0;
        for (const auto& [j, c] : red.neighbours(i))
            if (free_index[j] < n) a.at(fi, free_index[j]) -= c / red.mass(red.site(i));
    }
    const auto m = linalg::solve(a, std::vector<double>(free_nodes.size(), 1.0));
    const std::size_t i = red.index(x);
    double e = 1.0;
    for (const auto& [j, c] : red.neighbours(i))
        if (free_index[j] < n) e += c / red.mass(x) * m[free_index[j]];
    return e;
}

inline void require_kind(const NetworkReduction& red, ReductionKind kind)
{
    if (red.kind() != kind) throw std::invalid_argument("operation requires a " + to_string(kind) + " reduction");
}

/// C_eff(1, N) = C3_N * P^N[tau_1 < tau+_N] on omega3.
inline double effective_conductance(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    const Site N = red.N();
    return red.mass(N) * escape_probability(red, N, [N](Site x) {
               return x == 1 ? NodeRole::target : x == N ? NodeRole::avoid : NodeRole::free;
           });
}

/// C3_N * P^N[tau_0 < tau+_N]: the boundary-to-boundary conductance of omega3.
inline double boundary_conductance(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    const Site N = red.N();
    return red.mass(N) * escape_probability(red, N, [N](Site x) {
               return x == 0 ? NodeRole::target : x == N ? NodeRole::avoid : NodeRole::free;
           });
}

/// Series conductance of the nearest-neighbour path 1 - 2 - ... - N.
inline double series_lower_bound(const Environment& env, Site N)
{
    double resistance = 0.0;
    for (Site i = 1; i < N; ++i) resistance += 1.0 / env.edge(i, 1);
    return 1.0 / resistance;
}

struct CrossingRoutes {
    double full_window = 0.0; // harmonic_hit on the environment (banded route)
    double omega1 = 0.0;      // escape probability on the pruned network
    double reversal = 0.0;    // C1_E / C_0 * P^E_{omega1}[tau_B < tau+_E, X_{tau_B} = 0]
};

inline CrossingRoutes crossing_probability_routes(const Environment& env, Site N)
{
    detail::require_reduction_window(env, N);
    CrossingRoutes r;
    r.full_window = harmonic_hit(TransitionKernel(env), N).crossing_probability();

    const auto w1 = reduce(env, N, ReductionKind::omega1);
    r.omega1 = escape_probability(w1, 0, [N](Site x) {
        return x >= N ? NodeRole::target : x <= 0 ? NodeRole::avoid : NodeRole::free;
    });

    const auto u = harmonic_measure(w1, [N](Site x) {
        return x == 0 ? NodeRole::target : (x < 0 || x >= N) ? NodeRole::avoid : NodeRole::free;
    });
    double from_E = 0.0;
    for (const auto& [z, pz] : w1.pi_E) {
        if (pz == 0.0) continue;
        double p = 0.0;
        const auto iz = w1.index(z);
        for (const auto& [j, c] : w1.neighbours(iz)) p += c / w1.mass(z) * u[j];
        from_E += pz * p;
    }
    r.reversal = w1.C_E / env.conductance_sum(0) * from_E;
    return r;
}

/// P_omega[tau_E < tau+_B] from the origin, on the full window.
inline double crossing_probability_exact(const Environment& env, Site N)
{
    detail::require_reduction_window(env, N);
    return harmonic_hit(TransitionKernel(env), N).crossing_probability();
}

/// E_omega[tau+_B ^ tau_E] from the origin.
inline double expected_exit_time_exact(const Environment& env, Site N)
{
    detail::require_reduction_window(env, N);
    return expected_exit_time(TransitionKernel(env), N);
}

/// E_{omega3}[tau+_0 ^ tau_N]: the service time of one queue customer.
inline double reduced_exit_time(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    const Site N = red.N();
    return expected_return_time(red, 0, [N](Site x) { return x == 0 || x == N; });
}

/// E^{pi_B}_{omega1}[tau+_B ^ tau_E], the pi_B-started exit time.
inline double boundary_started_exit_time(const NetworkReduction& omega1)
{
    require_kind(omega1, ReductionKind::omega1);
    const Site N = omega1.N();
    double e = 0.0;
    for (const auto& [x, p] : omega1.pi_B)
        if (p > 0.0) e += p * expected_return_time(omega1, x, [N](Site y) { return y <= 0 || y >= N; });
    return e;
}

/// (1 / C3_0) * sum_x C3_x, the Little's-law bound on E_{omega3}[tau+_0 ^ tau_N].
inline double little_bound(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    return red.total_mass() / red.mass(0);
}

/// little_bound / pi_B(0): the resulting bound on E_omega[tau+_B ^ tau_E].
inline double little_exit_bound(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    double pi0 = 0.0;
    for (const auto& [x, p] : red.pi_B)
        if (x == 0) pi0 = p;
    return little_bound(red) / pi0;
}

inline nlohmann::json to_json(const NetworkReduction& red)
{
    nlohmann::json j;
    j["kind"] = to_string(red.kind());
    j["N"] = red.N();
    j["R_max"] = red.R();
    j["sites"] = {red.lo(), red.hi()};
    j["edges"] = nlohmann::json::array();
    for (const auto& e : red.edges()) j["edges"].push_back({e.a, e.b, e.w});
    j["masses"] = nlohmann::json::array();
    for (Site x = red.lo(); x <= red.hi(); ++x) j["masses"].push_back({x, red.mass(x)});
    j["C_B"] = red.C_B;
    j["C_E"] = red.C_E;
    j["pi_B"] = nlohmann::json::array();
    for (const auto& [x, p] : red.pi_B) j["pi_B"].push_back({x, p});
    j["pi_E"] = nlohmann::json::array();
    for (const auto& [x, p] : red.pi_E) j["pi_E"].push_back({x, p});
    return j;
}

} // namespace rwre
