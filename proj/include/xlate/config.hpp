#ifndef XLATE_CONFIG_HPP
#define XLATE_CONFIG_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "xlate/sampler.hpp"
#include "xlate/synth.hpp"

namespace xlate {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sectioned key=value file:
///
///   [synth]    generator sizes and noise (generate)
///   [effect:N] one planted effect: kind, x_cluster, y_cluster, values
///   [sampler]  sweep counts, seed, model sizes, path_kernel
///   [priors]   hyperparameters
///   [flags]    include_disease, shared_transitions, log1p, enforce_sign
///
/// Cluster indices are 1-based in the file. Unknown sections and keys are
/// rejected so typos do not silently fall back to defaults.
class ConfigFile {
public:
    static ConfigFile load(const std::filesystem::path& path);
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    /// Flat "section.key" -> value view, in file order within sections.
    const std::map<std::string, std::string>& entries() const { return entries_; }

    SynthConfig synth() const;
    GibbsConfig gibbs() const;

private:
    std::string origin_;
    std::map<std::string, std::string> entries_;
};

} // namespace xlate

#endif // XLATE_CONFIG_HPP
