#ifndef CNE_CLI_CONFIG_HPP
#define CNE_CLI_CONFIG_HPP

#include "../data.hpp"
#include "../loss.hpp"
#include "../optimize.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file config.hpp
 *
 * @brief Run configuration: sectioned `key = value` files mirrored by command-line flags.
 */

namespace cne::cli {

/**
 * Invalid invocation or configuration, detected before any training starts.
 * Maps to exit status 2.
 */
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Flat map from `section.key` to the raw value text.
 */
using Settings = std::map<std::string, std::string>;

enum class ValueType { text, integer, real, boolean, list };

/**
 * One configurable setting, its file location and its command-line flag.
 */
struct SettingKey {
    std::string section;
    std::string key;
    std::string flag;
    ValueType type;
    std::string help;

    std::string name() const { return section + "." + key; }
};

/**
 * Every setting understood by `embed` and `bench`, in serialization order.
 */
const std::vector<SettingKey>& setting_keys();

/**
 * @brief Everything needed to reproduce one embedding run.
 */
struct RunConfig {
    /// CSV path, or a generator spec such as `blobs:n_per_class=200,separation=20`.
    std::string data = "blobs";
    std::optional<std::string> label_column;
    std::optional<std::string> id_column;
    /// Scale every feature to zero mean and unit variance after loading.
    bool standardize = false;
    Index k = 15;
    LossSpec<double> loss;
    OptimConfig<double> optim;
    std::string out = "cne_out";
    bool plot = true;
};

/**
 * Parse a sectioned `key = value` file. Blank lines and lines starting with
 * `#` or `;` are ignored; keys before the first `[section]` are rejected.
 *
 * @throws UsageError naming `origin` and the line on malformed input.
 */
Settings parse_settings(std::istream& in, const std::string& origin);

Settings read_settings(const std::string& path);

/**
 * Build a validated `RunConfig` from settings. Mode-dependent defaults are
 * taken from `OptimConfig::defaults` of the requested mode before the
 * settings are applied.
 *
 * @throws UsageError on unknown keys or invalid values.
 */
RunConfig resolve(const Settings& settings);

/**
 * Serialize every setting, so that `resolve(parse_settings(to_ini(c)))`
 * reproduces `c` exactly.
 */
std::string to_ini(const RunConfig& config);

/**
 * @brief Synthetic data source parsed from `blobs[:key=value,...]` or `moons[:key=value,...]`.
 *
 * blobs keys: `n_per_class` (100), `n_classes` (3), `dim` (10), `separation` (20), `seed`.
 * moons keys: `n` (200), `noise` (0.05), `seed`.
 */
struct GeneratorSpec {
    std::string kind;
    std::map<std::string, std::string> params;

    /// Canonical text with every parameter explicit.
    std::string to_string() const;
};

/**
 * @return The parsed generator, or nothing when `source` does not name one
 * (and should be read as a file path).
 * @throws UsageError on a generator name with malformed or unknown parameters.
 */
std::optional<GeneratorSpec> parse_generator(const std::string& source, std::uint64_t default_seed);

Dataset<double> generate(const GeneratorSpec& gen);

/**
 * Load or generate the dataset of a run. A generator without an explicit
 * `seed` uses the optimizer seed.
 */
Dataset<double> load_data(const RunConfig& config);

/**
 * Rewrite `config.data` so that generator parameters, including the seed,
 * are explicit; file paths are left alone.
 */
void canonicalize_source(RunConfig& config);

}

#endif
