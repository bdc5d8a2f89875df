// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--only N[,N...]] [--known-failures N[,N...]]
//
// Exit status: 0 when everything selected passes, 1 on any failure not
// listed in --known-failures, 77 when the only failures are listed ones
// (reported by ctest as skipped). The PASS/FAIL lines are printed either way.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "moment_checks.hpp"
#include "test_util.hpp"
#include "xlate/checks.hpp"
#include "xlate/geweke.hpp"
#include "xlate/summarize.hpp"
#include "xlate/synth.hpp"
#include "xlate/trace.hpp"

#ifndef XLATE_CLI
#error "XLATE_CLI must name the built tool"
#endif

using namespace xlate;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(std::stoi(item));
    }
    return out;
}

/// Most frequent cluster of each variable over the snapshots.
Eigen::VectorXi modal_assignment(const Trace& trace, bool x_side, int k) {
    const auto& first = x_side ? trace.snapshots.front().assignment_x : trace.snapshots.front().assignment_y;
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(first.size(), k);
    for (const auto& s : trace.snapshots) {
        const auto& a = x_side ? s.assignment_x : s.assignment_y;
        for (Eigen::Index i = 0; i < a.size(); ++i) ++counts(i, a(i));
    }
    Eigen::VectorXi out(first.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) counts.row(i).maxCoeff(&out(i));
    return out;
}

std::string pair_label(int kx, int ky) { return std::to_string(kx + 1) + "-" + std::to_string(ky + 1); }

// ---------------------------------------------------------------- 1 and 2

struct BenchmarkFit {
    TraceSummary summary;
    std::vector<int> px, py; // true cluster -> fitted cluster
    double seconds = 0.0;
};

const BenchmarkFit& benchmark_fit() {
    static const BenchmarkFit fit = [] {
        const auto t0 = std::chrono::steady_clock::now();
        const SynthConfig synth = SynthConfig::benchmark();
        const auto [raw, truth] = generate(synth);
        const StudyPair pair{standardized(raw.x), standardized(raw.y)};
        GibbsConfig g;
        g.n_states = synth.n_states;
        g.k_x = synth.k_x;
        g.k_y = synth.k_y;
        g.n_burn_in = 5000;
        g.n_samples = 5000;
        g.thinning = 5;
        g.seed = 1;
        g.effects.include_disease = false;
        const Trace trace = run_chain(pair, g);
        BenchmarkFit out;
        out.summary = summarize_trace(trace);
        out.px = align_clusters(truth.assignment_x, modal_assignment(trace, true, g.k_x), g.k_x);
        out.py = align_clusters(truth.assignment_y, modal_assignment(trace, false, g.k_y), g.k_y);
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }();
    return fit;
}

Outcome criterion_1() {
    const auto& fit = benchmark_fit();
    const auto& f = fit.summary.pairing.link_freq;
    const std::pair<int, int> planted[] = {{fit.px[0], fit.py[2]}, {fit.px[2], fit.py[1]}};
    const double f1 = f(planted[0].first, planted[0].second);
    const double f2 = f(planted[1].first, planted[1].second);

    double max_other = 0.0;
    for (int kx = 0; kx < f.rows(); ++kx) {
        for (int ky = 0; ky < f.cols(); ++ky) {
            if (std::pair{kx, ky} == planted[0] || std::pair{kx, ky} == planted[1]) continue;
            max_other = std::max(max_other, f(kx, ky));
        }
    }
    const bool a = f1 >= 0.30 && f2 >= 0.30 && std::min(f1, f2) > max_other;
    const bool b = max_other <= 0.20;

    // Y-specific time effect of the fourth Y cluster: significant at every
    // state >= 3 and carried by the specific term (the cluster stays
    // predominantly unmatched).
    const int ky = fit.py[3];
    std::string states;
    bool c_sig = true;
    for (int s = 3; s <= fit.summary.n_states; ++s) {
        const auto* e = fit.summary.find("y", "time", std::to_string(ky + 1), s);
        const bool sig = e && e->verdict.verdict != Verdict::null;
        c_sig = c_sig && sig;
        states += " s" + std::to_string(s) + (sig ? "=sig" : "=null") +
                  (e ? fmt("(%.2f", e->verdict.lower) + fmt(",%.2f)", e->verdict.upper) : "");
    }
    const double unmatched = fit.summary.pairing.unmatched_y(ky);
    const bool c = c_sig && unmatched >= 0.5;

    Outcome o;
    o.pass = a && b && c;
    o.detail = std::string("(a)") + (a ? "pass" : "fail") + fmt(" planted links %.3f", f1) + fmt(", %.3f", f2) +
               "; (b)" + (b ? "pass" : "fail") + fmt(" max other %.3f", max_other) + "; (c)" + (c ? "pass" : "fail") +
               " Y-specific time" + states + fmt(", unmatched %.3f", unmatched) + fmt("; fit %.1fs", fit.seconds);
    return o;
}

Outcome criterion_2() {
    const auto& fit = benchmark_fit();
    // Clusters without planted effects: X cluster 2 and Y cluster 1 (1-based, true labels).
    const int nx = fit.px[1], ny = fit.py[0];
    const std::string lx = std::to_string(nx + 1), ly = std::to_string(ny + 1);
    int checked = 0, bad = 0, by_verdict = 0, by_found = 0, bad_shared = 0;
    double worst_found = 0.0;
    std::string worst;
    for (const auto& e : fit.summary.effects) {
        bool involved = false;
        if (e.group == "x") involved = e.cluster == lx;
        if (e.group == "y") involved = e.cluster == ly;
        if (e.group == "shared") {
            const auto dash = e.cluster.find('-');
            involved = e.cluster.substr(0, dash) == lx || e.cluster.substr(dash + 1) == ly;
        }
        if (!involved) continue;
        ++checked;
        const bool ok = e.verdict.found_fraction < 0.25 && e.verdict.verdict == Verdict::null;
        if (!ok) ++bad;
        if (!ok && e.group == "shared") ++bad_shared;
        by_verdict += e.verdict.verdict != Verdict::null;
        by_found += e.verdict.found_fraction >= 0.25;
        if (e.verdict.found_fraction >= worst_found) {
            worst_found = e.verdict.found_fraction;
            worst = e.group + "/" + e.effect + "/" + e.cluster + "/s" + std::to_string(e.state) + " " +
                    to_string(e.verdict.verdict);
        }
    }
    Outcome o;
    o.pass = bad == 0 && checked > 0;
    o.detail = std::to_string(bad) + " of " + std::to_string(checked) + " null-cluster entries violate (" +
               std::to_string(by_verdict) + " non-null verdicts, " + std::to_string(by_found) +
               " found fractions >= 0.25, " + std::to_string(bad_shared) + " shared); largest found fraction " + fmt("%.3f", worst_found) + " (" + worst + ")";
    return o;
}

// ---------------------------------------------------------------- 3 to 6

Outcome criterion_3() {
    const auto r = hmm_oracle_check(100000, 1, PathKernel::single_site);
    return {r.max_tv() <= 0.02, fmt("max per-site TV %.5f at 100k sweeps (tolerance 0.02)", r.max_tv())};
}

Outcome criterion_4() {
    const auto r = matching_oracle_check(100000, 1);
    return {r.abs_error() <= 0.02, fmt("link occupancy %.4f", r.empirical) + fmt(" vs exact %.4f", r.exact) +
                                       " over 100k moves (tolerance 0.02)"};
}

Outcome criterion_5() {
    const auto ok = geweke_check(geweke_design(), geweke_config(), 20000, 1);
    GibbsConfig faulty = geweke_config();
    faulty.fault = Fault::residual_shape;
    const auto bad = geweke_check(geweke_design(), faulty, 20000, 1);
    return {ok.max_abs_z() < 4.0 && bad.max_abs_z() > 6.0,
            fmt("max |z| %.2f over ", ok.max_abs_z()) + std::to_string(ok.stats.size()) +
                fmt(" statistics at 20k rounds (< 4); injected residual fault max |z| %.1f (> 6)", bad.max_abs_z())};
}

Outcome criterion_6() {
    Outcome o{true, ""};
    for (const auto& r : moments::all(50000, 1)) {
        o.pass = o.pass && r.rel_error() < 0.02;
        o.detail += (o.detail.empty() ? "" : ", ") + r.name + fmt(" %.4f", r.rel_error());
    }
    o.detail = "relative error of 50k-draw means: " + o.detail + " (tolerance 0.02)";
    return o;
}

// ---------------------------------------------------------------- 7

Outcome criterion_7() {
    SynthConfig c;
    c.n_individuals_x = 22;
    c.n_individuals_y = 1;
    c.p_x = 200;
    c.p_y = 4;
    c.k_x = 4;
    c.k_y = 1;
    c.n_states = 5;
    c.seed = 7;
    // Two responding clusters (0 and 2), two silent ones (1 and 3).
    c.planted = {
        {EffectKind::specific_time_x, 0, -1, {0.0, 1.0, 2.0, 3.0, 4.0}},
        {EffectKind::specific_interaction_x, 2, -1, {0.0, -1.0, -2.0, -3.0, -4.0}},
    };
    const auto [raw, truth] = generate(c);
    Rng split_rng = Rng::stream(c.seed, "split");
    const auto [first, second] = split_individuals(raw.x, split_rng);
    const StudyPair pair{standardized(subset_individuals(raw.x, first)),
                         standardized(subset_individuals(raw.x, second))};

    GibbsConfig g;
    g.n_states = 5;
    g.k_x = 4;
    g.k_y = 4;
    g.n_burn_in = 5000;
    g.n_samples = 5000;
    g.thinning = 5;
    g.seed = 1;
    g.effects.include_disease = false;
    const Trace trace = run_chain(pair, g);
    const TraceSummary s = summarize_trace(trace);
    const auto px = align_clusters(truth.assignment_x, modal_assignment(trace, true, 4), 4);
    const auto py = align_clusters(truth.assignment_x, modal_assignment(trace, false, 4), 4);
    const Eigen::MatrixXi ranks = link_ranks(s.pairing.link_freq);

    bool pass = true;
    std::string detail;
    for (int k : {0, 2}) {
        Eigen::Index best;
        s.pairing.link_freq.row(px[k]).maxCoeff(&best);
        const bool ok = best == py[k] && s.pairing.link_freq(px[k], py[k]) > 0.0;
        pass = pass && ok;
        detail += "responding cluster " + std::to_string(k + 1) + ": link " + pair_label(px[k], py[k]) +
                  fmt(" %.3f", s.pairing.link_freq(px[k], py[k])) + (ok ? " rank-1 in row" : " NOT rank-1 in row") +
                  " (overall rank " + std::to_string(ranks(px[k], py[k])) + "); ";
    }
    for (int k : {1, 3}) {
        const double ux = s.pairing.unmatched_x(px[k]), uy = s.pairing.unmatched_y(py[k]);
        const bool ok = ux >= 0.5 && uy >= 0.5;
        pass = pass && ok;
        detail += "silent cluster " + std::to_string(k + 1) + fmt(": unmatched %.3f", ux) + fmt("/%.3f", uy) +
                  (ok ? "" : " (matched too often)") + "; ";
    }
    detail += std::to_string(first.size()) + "+" + std::to_string(second.size()) + " individuals";
    return {pass, detail};
}

// ---------------------------------------------------------------- 8

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + XLATE_CLI + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_8() {
    testutil::TempDir dir("acceptance_det");
    testutil::write_file(dir / "c.ini", R"([synth]
n_individuals_x = 6
n_individuals_y = 6
min_length = 4
max_length = 8
p_x = 40
p_y = 42
k_x = 3
k_y = 3
n_states = 4

[effect:1]
kind = shared_time
x_cluster = 1
y_cluster = 2
values = 0,1,2,3

[sampler]
n_burn_in = 200
n_samples = 200
thinning = 2
seed = 11
n_states = 4
k_x = 3
k_y = 3
)");
    const auto d = dir.path().string();
    if (run_cli("generate --config " + d + "/c.ini --out " + d + "/data") != 0) return {false, "generate failed"};
    const std::string inputs = d + "/data/x_values.csv " + d + "/data/x_meta.csv " + d + "/data/y_values.csv " + d +
                               "/data/y_meta.csv --config " + d + "/c.ini";
    bool ok = run_cli("fit " + inputs + " --out " + d + "/a") == 0 && run_cli("fit " + inputs + " --out " + d + "/b") == 0;
    // Two chains under different worker caps must also agree chain by chain.
    ok = ok && run_cli("fit " + inputs + " --chains 2 --out " + d + "/p1", "XLATE_THREADS=1") == 0 &&
         run_cli("fit " + inputs + " --chains 2 --out " + d + "/p2", "XLATE_THREADS=2") == 0;
    if (!ok) return {false, "fit failed"};
    const auto a = testutil::read_file(dir / "a/scalars.csv");
    const bool same = !a.empty() && a == testutil::read_file(dir / "b/scalars.csv");
    const bool same_chains =
        testutil::read_file(dir / "p1/chain_1/scalars.csv") == testutil::read_file(dir / "p2/chain_1/scalars.csv") &&
        testutil::read_file(dir / "p1/chain_2/scalars.csv") == testutil::read_file(dir / "p2/chain_2/scalars.csv");
    return {same && same_chains, std::string("repeat fit scalars.csv ") + (same ? "identical" : "DIFFERENT") +
                                     "; 2-chain fit under 1 vs 2 workers " + (same_chains ? "identical" : "DIFFERENT")};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, known;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--only") {
            only = parse_list(argv[i + 1]);
        } else if (flag == "--known-failures") {
            known = parse_list(argv[i + 1]);
        } else {
            std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"generated-data recovery", criterion_1},
        {"no false-positive effects", criterion_2},
        {"HMM oracle", criterion_3},
        {"matching detailed balance", criterion_4},
        {"Geweke joint-distribution test", criterion_5},
        {"conjugate moment tests", criterion_6},
        {"split-and-self-match", criterion_7},
        {"determinism", criterion_8},
    };

    int unexpected = 0, expected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++(known.count(id) ? expected : unexpected);
    }
    if (unexpected > 0) return 1;
    return expected > 0 ? 77 : 0;
}
