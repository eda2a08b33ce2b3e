#pragma once

#include <string>
#include <vector>

#include "vos/datagen.hpp"
#include "vos/heatmap.hpp"
#include "vos/trainer.hpp"

namespace vos {

/// Flat `key = value` configuration with a fixed, documented key set.
/// Unknown keys are rejected on sight. Values are kept as the strings the
/// user supplied, so dumping and re-loading reproduces the run exactly.
class Config {
public:
    /// All keys present at their documented defaults.
    Config();

    /// Throws std::invalid_argument naming the key when it is not registered
    /// or the value fails to parse as the key's type.
    void set(const std::string& key, const std::string& value);

    /// Parses `key = value` lines; `#` starts a comment; blank lines are
    /// skipped. Errors carry the 1-based line number.
    void load_file(const std::string& path);

    /// Resolves a bare leaf name ("beta" -> "train.beta") when it is
    /// unambiguous; returns the full key unchanged when already dotted.
    /// Throws on unknown or ambiguous names.
    std::string resolve_key(const std::string& name) const;

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::size_t get_size(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    const std::string& get_string(const std::string& key) const;

    /// Effective config in registration order, one `key = value` line each;
    /// re-loadable via load_file.
    std::string dump() const;

    /// Key list with defaults and one-line docs (for --help).
    static std::string describe_keys();

    /// Derived structured views.
    DatasetSpec dataset_spec() const;
    RunConfig run_config(std::size_t input_dim) const;
    GridSpec grid_spec() const;
    double target_tpr() const;

private:
    const std::string& raw(const std::string& key) const;
    std::vector<std::string> values_;
};

// Subcommands. All throw on failure; run_cli maps exceptions to exit codes.
void cmd_generate_data(const Config& config, const std::string& out_dir);
void cmd_train(const Config& config, const std::string& data_path,
               const std::string& out_checkpoint, const std::string& metrics_path);
void cmd_score(const Config& config, const std::string& checkpoint_path,
               const std::string& data_path, const std::string& method,
               const std::string& out_path);
void cmd_eval(const Config& config, const std::string& id_scores_path,
              const std::string& ood_scores_path, const std::string& out_path);
void cmd_plot_uncertainty(const Config& config, const std::string& checkpoint_path,
                          const std::string& out_pgm, const std::string& svg_path);

/// Entry point behind main(). Exit codes: 0 success, 1 usage or config
/// error, 2 runtime/numeric error.
int run_cli(int argc, const char* const* argv);

}  // namespace vos
