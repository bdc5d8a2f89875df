// xlate: generate synthetic study pairs, fit the model, summarize traces and
// run the sampler self-checks.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "xlate/checks.hpp"
#include "xlate/config.hpp"
#include "xlate/data.hpp"
#include "xlate/geweke.hpp"
#include "xlate/summarize.hpp"
#include "xlate/synth.hpp"
#include "xlate/trace.hpp"

#ifndef XLATE_VERSION
#define XLATE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

unsigned worker_cap() {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("XLATE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) cap = static_cast<unsigned>(n);
    }
    return cap;
}

struct GenerateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
    const auto file = xlate::ConfigFile::load(a.config);
    xlate::SynthConfig config = file.synth();
    if (a.seed) config.seed = *a.seed;
    const auto [pair, truth] = xlate::generate(config);
    fs::create_directories(a.out);
    const fs::path out(a.out);
    xlate::write_values_csv(pair.x, out / "x_values.csv");
    xlate::write_meta_csv(pair.x, out / "x_meta.csv");
    xlate::write_values_csv(pair.y, out / "y_values.csv");
    xlate::write_meta_csv(pair.y, out / "y_meta.csv");
    xlate::write_ground_truth(truth, out / "ground_truth.json");
    std::cout << "wrote " << pair.x.n_samples() << " X samples and " << pair.y.n_samples() << " Y samples to "
              << a.out << "\n";
    return 0;
}

struct FitArgs {
    std::string x_values, x_meta, y_values, y_meta;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int chains = 1;
};

int cmd_fit(const FitArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    const auto file = xlate::ConfigFile::load(a.config);
    xlate::GibbsConfig config = file.gibbs();
    if (a.seed) config.seed = *a.seed;
    if (a.chains < 1) throw std::invalid_argument("--chains must be at least 1");

    const xlate::LoadOptions load{config.log1p};
    xlate::StudyPair pair{xlate::load_dataset(a.x_values, a.x_meta, load),
                          xlate::load_dataset(a.y_values, a.y_meta, load)};

    std::vector<std::uint64_t> seeds;
    if (a.chains == 1) {
        seeds.push_back(config.seed);
    } else {
        for (int c = 1; c <= a.chains; ++c) {
            seeds.push_back(xlate::Rng::derive_seed(config.seed, "chain-" + std::to_string(c)));
        }
    }

    std::vector<xlate::Trace> traces(seeds.size());
    std::vector<std::string> errors(seeds.size());
    const unsigned cap = std::min<unsigned>(worker_cap(), static_cast<unsigned>(seeds.size()));
    std::size_t next = 0;
    std::mutex lock;
    auto worker = [&] {
        for (;;) {
            std::size_t c;
            {
                std::lock_guard<std::mutex> g(lock);
                if (next >= seeds.size()) return;
                c = next++;
            }
            xlate::GibbsConfig chain_config = config;
            chain_config.seed = seeds[c];
            try {
                traces[c] = xlate::run_chain(pair, chain_config);
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < cap; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t c = 0; c < errors.size(); ++c) {
        if (!errors[c].empty()) throw std::runtime_error("chain " + std::to_string(c + 1) + ": " + errors[c]);
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    if (traces.size() == 1) {
        xlate::write_trace(traces[0], out);
    } else {
        for (std::size_t c = 0; c < traces.size(); ++c) {
            xlate::write_trace(traces[c], out / ("chain_" + std::to_string(c + 1)));
        }
        std::vector<std::vector<double>> lj, links;
        for (const auto& t : traces) {
            std::vector<double> a_lj, a_links;
            for (const auto& s : t.scalars) {
                if (s.burn_in) continue;
                a_lj.push_back(s.log_joint);
                a_links.push_back(s.n_links);
            }
            lj.push_back(std::move(a_lj));
            links.push_back(std::move(a_links));
        }
        std::ofstream gr(out / "gelman_rubin.txt");
        gr << "statistic\tpsrf\n";
        gr << "log_joint\t" << xlate::gelman_rubin(lj) << "\n";
        gr << "n_links\t" << xlate::gelman_rubin(links) << "\n";
        std::cout << "log_joint psrf " << xlate::gelman_rubin(lj) << ", n_links psrf "
                  << xlate::gelman_rubin(links) << "\n";
    }

    json manifest;
    manifest["version"] = XLATE_VERSION;
    manifest["command"] = "fit";
    manifest["seed"] = config.seed;
    manifest["chains"] = a.chains;
    manifest["chain_seeds"] = seeds;
    manifest["config_path"] = a.config;
    manifest["config"] = file.entries();
    json inputs = json::array();
    for (const auto& path : {a.x_values, a.x_meta, a.y_values, a.y_meta, a.config}) {
        inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    }
    manifest["inputs"] = inputs;
    manifest["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
    std::cout << "wrote " << traces[0].snapshots.size() << " snapshots per chain to " << a.out << "\n";
    return 0;
}

struct SummarizeArgs {
    std::string trace;
    std::string out;
    double level = 0.90;
    double threshold = 0.1;
};

int cmd_summarize(const SummarizeArgs& a) {
    const xlate::Trace trace = xlate::read_trace(a.trace);
    const auto summary = xlate::summarize_trace(trace, a.level, a.threshold);
    xlate::export_plot_data(summary, a.out);
    std::ifstream report(fs::path(a.out) / "report.txt");
    std::cout << report.rdbuf();
    return 0;
}

struct CheckArgs {
    std::string mode;
    int rounds = 0;
    std::uint64_t seed = 1;
};

int cmd_check(const CheckArgs& a) {
    if (a.mode == "geweke") {
        const int rounds = a.rounds > 0 ? a.rounds : 20000;
        const auto report = xlate::geweke_check(xlate::geweke_design(), xlate::geweke_config(), rounds, a.seed);
        std::printf("%-28s %12s %12s %8s\n", "statistic", "forward", "chain", "z");
        for (const auto& s : report.stats) {
            std::printf("%-28s %12.5f %12.5f %8.3f\n", s.name.c_str(), s.forward_mean, s.chain_mean, s.z);
        }
        const double z = report.max_abs_z();
        std::printf("max |z| = %.3f over %d rounds\n", z, rounds);
        return z < 4.0 ? 0 : 1;
    }
    if (a.mode == "hmm-oracle") {
        const int sweeps = a.rounds > 0 ? a.rounds : 100000;
        const auto r = xlate::hmm_oracle_check(sweeps, a.seed);
        std::printf("max per-site TV distance = %.5f over %d sweeps\n", r.max_tv(), sweeps);
        return r.max_tv() <= 0.02 ? 0 : 1;
    }
    const int moves = a.rounds > 0 ? a.rounds : 100000;
    const auto r = xlate::matching_oracle_check(moves, a.seed);
    std::printf("link occupancy %.5f, exact %.5f, |error| = %.5f over %d moves\n", r.empirical, r.exact,
                r.abs_error(), moves);
    return r.abs_error() <= 0.02 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent-effect matching of clusters across two unpaired time-series datasets"};
    app.set_version_flag("--version", XLATE_VERSION);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Draw a synthetic study pair with ground truth");
    generate->add_option("--config", gen.config, "Config file with a [synth] section")->required();
    generate->add_option("--out", gen.out, "Output directory")->required();
    generate->add_option("--seed", gen.seed, "Overrides synth.seed");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Run the Gibbs sampler and write a trace");
    fitc->add_option("x_values", fit.x_values, "X values CSV")->required();
    fitc->add_option("x_meta", fit.x_meta, "X sample metadata CSV")->required();
    fitc->add_option("y_values", fit.y_values, "Y values CSV")->required();
    fitc->add_option("y_meta", fit.y_meta, "Y sample metadata CSV")->required();
    fitc->add_option("--config", fit.config, "Config file with [sampler], [priors], [flags]")->required();
    fitc->add_option("--out", fit.out, "Output directory")->required();
    fitc->add_option("--seed", fit.seed, "Overrides sampler.seed");
    fitc->add_option("--chains", fit.chains, "Independent chains with derived seeds");

    SummarizeArgs sum;
    auto* summarize = app.add_subcommand("summarize", "Posterior summaries and plot-ready tables");
    summarize->add_option("trace_dir", sum.trace, "Trace directory written by fit")->required();
    summarize->add_option("--out", sum.out, "Output directory")->required();
    summarize->add_option("--level", sum.level, "Credible interval level");
    summarize->add_option("--threshold", sum.threshold, "Magnitude counted by the found fraction");

    CheckArgs chk;
    auto* check = app.add_subcommand("check", "Sampler self-checks");
    check->add_option("mode", chk.mode, "geweke, hmm-oracle or matching-oracle")
        ->required()
        ->check(CLI::IsMember({"geweke", "hmm-oracle", "matching-oracle"}));
    check->add_option("--rounds", chk.rounds, "Rounds, sweeps or moves (mode default when omitted)");
    check->add_option("--seed", chk.seed, "Seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (fitc->parsed()) return cmd_fit(fit);
        if (summarize->parsed()) return cmd_summarize(sum);
        return cmd_check(chk);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
