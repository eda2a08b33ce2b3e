#include <fstream>
#include <iostream>
#include <stdexcept>

#include "vos/cli.hpp"
#include "vos/evalkit.hpp"

namespace vos {

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

void cmd_generate_data(const Config& config, const std::string& out_dir) {
    DatasetSpec spec = config.dataset_spec();
    spec.validate();

    std::vector<LabeledExample> train = make_gmm(spec);

    DatasetSpec val_spec = spec;
    val_spec.seed = spec.seed + 1;
    val_spec.n_per_class = config.get_size("data.n_val_per_class");
    std::vector<LabeledExample> val = make_gmm(val_spec);

    RngState ood_rng(spec.seed + 2);
    std::vector<Vector> ood = spec.ood.shape == OodSpec::Shape::Annulus
                                  ? make_ood_annulus(spec, ood_rng)
                                  : make_ood_box(spec, ood_rng);
    std::vector<LabeledExample> ood_rows;
    ood_rows.reserve(ood.size());
    for (Vector& x : ood) ood_rows.push_back({std::move(x), -1});

    write_dataset(out_dir + "/train.csv", train);
    write_dataset(out_dir + "/val.csv", val);
    write_dataset(out_dir + "/ood.csv", ood_rows);
}

void cmd_train(const Config& config, const std::string& data_path,
               const std::string& out_checkpoint, const std::string& metrics_path) {
    std::vector<LabeledExample> data = read_dataset(data_path);
    RunConfig rc = config.run_config(data.front().x.size());
    std::string metrics_log;
    Model model = train(rc, data, &metrics_log);
    save_checkpoint(out_checkpoint, model);
    write_text_file(metrics_path, metrics_log);
}

void cmd_score(const Config& config, const std::string& checkpoint_path,
               const std::string& data_path, const std::string& method,
               const std::string& out_path) {
    (void)config;
    double (*scorer)(const Model&, const Vector&) = nullptr;
    if (method == "vos") scorer = ood_score;
    else if (method == "msp") scorer = msp_score;
    else if (method == "energy") scorer = raw_energy_score;
    else throw std::invalid_argument("score: unknown method '" + method + "' (vos|msp|energy)");

    Model model = load_checkpoint(checkpoint_path);
    std::vector<LabeledExample> data = read_dataset(data_path);
    std::vector<ScoredSample> scored;
    scored.reserve(data.size());
    for (const LabeledExample& ex : data) {
        scored.push_back({scorer(model, ex.x), ex.label >= 0});
    }
    write_scores(out_path, scored);
}

void cmd_eval(const Config& config, const std::string& id_scores_path,
              const std::string& ood_scores_path, const std::string& out_path) {
    std::vector<double> id_scores;
    for (const ScoredSample& s : read_scores(id_scores_path)) {
        if (s.is_id) id_scores.push_back(s.score);
    }
    if (id_scores.empty()) {
        throw std::runtime_error("eval: " + id_scores_path + " has no rows flagged is_id=1");
    }
    std::vector<double> ood_scores;
    for (const ScoredSample& s : read_scores(ood_scores_path)) {
        if (!s.is_id) ood_scores.push_back(s.score);
    }
    if (ood_scores.empty()) {
        throw std::runtime_error("eval: " + ood_scores_path + " has no rows flagged is_id=0");
    }
    MetricsReport report = compute_metrics(id_scores, ood_scores, config.target_tpr());
    std::string text = report.to_text();
    std::cout << text;
    if (!out_path.empty()) write_text_file(out_path, text);
}

void cmd_plot_uncertainty(const Config& config, const std::string& checkpoint_path,
                          const std::string& out_pgm, const std::string& svg_path) {
    Model model = load_checkpoint(checkpoint_path);
    GridSpec grid = config.grid_spec();
    std::vector<double> values = eval_score_grid(model, grid);
    write_text_file(out_pgm, grid_to_pgm(values, grid.resolution, grid.resolution));
    write_text_file(out_pgm + ".txt", grid_to_text(values, grid.resolution, grid.resolution));
    if (!svg_path.empty()) {
        write_text_file(svg_path, grid_to_svg_contour(values, grid.resolution, grid.resolution,
                                                      config.get_double("plot.level")));
    }
}

namespace {

const char kUsage[] =
    "usage: vos-lab <command> [--config <file>] [--<key> <value> ...]\n"
    "\n"
    "commands:\n"
    "  generate-data  --out <dir>                  write train/val/ood CSVs\n"
    "  train          --data <csv> --out <ckpt> [--metrics <csv>]\n"
    "  score          --checkpoint <ckpt> --data <csv> --out <scores>\n"
    "                 [--method vos|msp|energy]\n"
    "  eval           --id <scores> --ood <scores> [--out <report>]\n"
    "  plot-uncertainty --checkpoint <ckpt> --out <pgm> [--svg <svg>]\n"
    "  dump-config                                 print the effective config\n"
    "\n"
    "Any config key can be overridden with --<key> <value>; bare leaf names\n"
    "work when unambiguous (--beta 0.2 means --train.beta 0.2).\n";

struct ParsedArgs {
    Config config;
    // Path-ish flags that are not config keys.
    std::string out, data, checkpoint, method = "vos", id, ood, svg, metrics;
};

ParsedArgs parse_args(int argc, const char* const* argv) {
    ParsedArgs parsed;
    int i = 2;
    auto next_value = [&](const std::string& flag) -> std::string {
        if (i + 1 >= argc) throw std::invalid_argument("flag " + flag + " needs a value");
        return argv[++i];
    };
    for (; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0) {
            throw std::invalid_argument("unexpected argument '" + arg + "'");
        }
        std::string name = arg.substr(2);
        if (name == "config") parsed.config.load_file(next_value(arg));
        else if (name == "out") parsed.out = next_value(arg);
        else if (name == "data") parsed.data = next_value(arg);
        else if (name == "checkpoint") parsed.checkpoint = next_value(arg);
        else if (name == "method") parsed.method = next_value(arg);
        else if (name == "id") parsed.id = next_value(arg);
        else if (name == "ood") parsed.ood = next_value(arg);
        else if (name == "svg") parsed.svg = next_value(arg);
        else if (name == "metrics") parsed.metrics = next_value(arg);
        else parsed.config.set(parsed.config.resolve_key(name), next_value(arg));
    }
    return parsed;
}

void require_flag(const std::string& value, const char* flag) {
    if (value.empty()) throw std::invalid_argument(std::string("missing required flag ") + flag);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return 1;
    }
    std::string command = argv[1];
    if (command == "--help" || command == "-h" || command == "help") {
        std::cout << kUsage << "\nconfig keys:\n" << Config::describe_keys();
        return 0;
    }
    try {
        ParsedArgs parsed = parse_args(argc, argv);
        if (command == "generate-data") {
            require_flag(parsed.out, "--out");
            cmd_generate_data(parsed.config, parsed.out);
        } else if (command == "train") {
            require_flag(parsed.data, "--data");
            require_flag(parsed.out, "--out");
            std::string metrics =
                parsed.metrics.empty() ? parsed.out + ".metrics.csv" : parsed.metrics;
            cmd_train(parsed.config, parsed.data, parsed.out, metrics);
        } else if (command == "score") {
            require_flag(parsed.checkpoint, "--checkpoint");
            require_flag(parsed.data, "--data");
            require_flag(parsed.out, "--out");
            cmd_score(parsed.config, parsed.checkpoint, parsed.data, parsed.method, parsed.out);
        } else if (command == "eval") {
            require_flag(parsed.id, "--id");
            require_flag(parsed.ood, "--ood");
            cmd_eval(parsed.config, parsed.id, parsed.ood, parsed.out);
        } else if (command == "plot-uncertainty") {
            require_flag(parsed.checkpoint, "--checkpoint");
            require_flag(parsed.out, "--out");
            cmd_plot_uncertainty(parsed.config, parsed.checkpoint, parsed.out, parsed.svg);
        } else if (command == "dump-config") {
            std::cout << parsed.config.dump();
        } else {
            std::cerr << "unknown command '" << command << "'\n" << kUsage;
            return 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace vos
