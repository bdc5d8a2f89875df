#include "xlate/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace xlate {

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"synth",
     {"n_individuals_x", "n_individuals_y", "min_length", "max_length", "p_x", "p_y", "k_x", "k_y", "n_states",
      "advance_prob", "residual_sd", "loading_magnitude", "negative_loading_prob", "seed"}},
    {"effect", {"kind", "x_cluster", "y_cluster", "values"}},
    {"sampler", {"n_burn_in", "n_samples", "thinning", "seed", "n_states", "k_x", "k_y", "path_kernel"}},
    {"priors",
     {"loading_var", "residual_shape", "residual_rate", "mean_var", "transition_advance", "transition_stay",
      "shared_var", "specific_ratio"}},
    {"flags", {"include_disease", "shared_transitions", "log1p", "enforce_sign"}},
};

std::string section_kind(const std::string& section) {
    const auto colon = section.find(':');
    return colon == std::string::npos ? section : section.substr(0, colon);
}

class Reader {
public:
    Reader(const std::map<std::string, std::string>& entries, std::string origin)
        : entries_(entries), origin_(std::move(origin)) {}

    const std::string* find(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::string& require(const std::string& key) const {
        const auto* v = find(key);
        if (!v) throw ConfigError(origin_ + ": missing config key '" + key + "'");
        return *v;
    }

    template <typename T>
    T convert(const std::string& key, const std::string& text) const {
        std::istringstream ss(text);
        T v{};
        ss >> v;
        if (ss.fail() || !(ss >> std::ws).eof()) {
            throw ConfigError(origin_ + ": bad value '" + text + "' for config key '" + key + "'");
        }
        return v;
    }

    template <typename T>
    T get(const std::string& key, T fallback) const {
        const auto* v = find(key);
        return v ? convert<T>(key, *v) : fallback;
    }

    template <typename T>
    T required(const std::string& key) const {
        return convert<T>(key, require(key));
    }

    bool flag(const std::string& key, bool fallback) const {
        const auto* v = find(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError(origin_ + ": bad boolean '" + *v + "' for config key '" + key + "'");
    }

    const std::string& origin() const { return origin_; }

private:
    const std::map<std::string, std::string>& entries_;
    std::string origin_;
};

std::vector<double> parse_values(const Reader& r, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(r.require(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(r.convert<double>(key, item));
    return out;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    ConfigFile out;
    out.origin_ = origin;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
        const auto known = kKnownKeys.find(section_kind(section));
        if (known == kKnownKeys.end()) throw ConfigError(origin + ": unknown config section '" + section + "'");
        for (const auto& [key, value] : body) {
            if (!known->second.count(key)) {
                throw ConfigError(origin + ": unknown config key '" + section + "." + key + "'");
            }
            out.entries_[section + "." + key] = value.get_value<std::string>();
        }
    }
    return out;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path.string());
}

bool ConfigFile::has_section(const std::string& section) const {
    const std::string prefix = section + ".";
    const auto it = entries_.lower_bound(prefix);
    return it != entries_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

SynthConfig ConfigFile::synth() const {
    const Reader r(entries_, origin_);
    SynthConfig c;
    c.n_individuals_x = r.required<int>("synth.n_individuals_x");
    c.n_individuals_y = r.required<int>("synth.n_individuals_y");
    c.min_length = r.required<int>("synth.min_length");
    c.max_length = r.required<int>("synth.max_length");
    c.p_x = r.required<int>("synth.p_x");
    c.p_y = r.required<int>("synth.p_y");
    c.k_x = r.required<int>("synth.k_x");
    c.k_y = r.required<int>("synth.k_y");
    c.n_states = r.required<int>("synth.n_states");
    c.advance_prob = r.get("synth.advance_prob", c.advance_prob);
    c.residual_sd = r.get("synth.residual_sd", c.residual_sd);
    c.loading_magnitude = r.get("synth.loading_magnitude", c.loading_magnitude);
    c.negative_loading_prob = r.get("synth.negative_loading_prob", c.negative_loading_prob);
    c.seed = r.get<std::uint64_t>("synth.seed", c.seed);

    // [effect:N] sections in numeric order.
    std::map<int, std::string> sections;
    for (const auto& [key, value] : entries_) {
        if (key.rfind("effect:", 0) != 0) continue;
        const std::string section = key.substr(0, key.find('.'));
        sections[r.convert<int>(section, section.substr(7))] = section;
    }
    for (const auto& [index, section] : sections) {
        PlantedEffect e;
        const std::string kind = r.require(section + ".kind");
        const auto parsed = parse_effect_kind(kind);
        if (!parsed) throw ConfigError(origin_ + ": unknown effect kind '" + kind + "' in [" + section + "]");
        e.kind = *parsed;
        e.cluster_x = r.get(section + ".x_cluster", 0) - 1;
        e.cluster_y = r.get(section + ".y_cluster", 0) - 1;
        e.values = parse_values(r, section + ".values");
        c.planted.push_back(std::move(e));
    }
    return c;
}

GibbsConfig ConfigFile::gibbs() const {
    const Reader r(entries_, origin_);
    GibbsConfig g;
    g.n_burn_in = r.get("sampler.n_burn_in", g.n_burn_in);
    g.n_samples = r.get("sampler.n_samples", g.n_samples);
    g.thinning = r.get("sampler.thinning", g.thinning);
    g.seed = r.get<std::uint64_t>("sampler.seed", g.seed);
    g.n_states = r.required<int>("sampler.n_states");
    g.k_x = r.required<int>("sampler.k_x");
    g.k_y = r.required<int>("sampler.k_y");
    const std::string kernel = r.get<std::string>("sampler.path_kernel", "single_site");
    if (kernel == "single_site") {
        g.path_kernel = PathKernel::single_site;
    } else if (kernel == "ffbs") {
        g.path_kernel = PathKernel::ffbs;
    } else {
        throw ConfigError(origin_ + ": bad value '" + kernel + "' for config key 'sampler.path_kernel'");
    }
    g.factor.loading_var = r.get("priors.loading_var", g.factor.loading_var);
    g.factor.residual_shape = r.get("priors.residual_shape", g.factor.residual_shape);
    g.factor.residual_rate = r.get("priors.residual_rate", g.factor.residual_rate);
    g.factor.mean_var = r.get("priors.mean_var", g.factor.mean_var);
    g.transition.advance = r.get("priors.transition_advance", g.transition.advance);
    g.transition.stay = r.get("priors.transition_stay", g.transition.stay);
    g.effects.shared_var = r.get("priors.shared_var", g.effects.shared_var);
    g.effects.specific_ratio = r.get("priors.specific_ratio", g.effects.specific_ratio);
    g.effects.include_disease = r.flag("flags.include_disease", g.effects.include_disease);
    g.shared_transitions = r.flag("flags.shared_transitions", g.shared_transitions);
    g.log1p = r.flag("flags.log1p", g.log1p);
    g.enforce_sign = r.flag("flags.enforce_sign", g.enforce_sign);
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin_ + ": " + e.what());
    }
    return g;
}

} // namespace xlate
