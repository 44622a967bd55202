#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "fraclab/analysis.hpp"
#include "fraclab/bifurcation.hpp"
#include "fraclab/corpus.hpp"
#include "fraclab/dynamics.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/format.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/pipeline.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/svg.hpp"
#include "json.hpp"

namespace fraclab::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open output file " + path.string());
  return f;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open input file " + path.string());
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
  if (!f) throw DataError("failed writing " + path.string());
}

struct LoadedCorpus {
  CorpusManifest manifest;
  std::vector<TrajectoryRecord> records;
};

LoadedCorpus load_corpus_dir(const fs::path& dir) {
  LoadedCorpus c;
  {
    auto in = open_in(dir / "manifest.json");
    std::stringstream ss;
    ss << in.rdbuf();
    c.manifest = manifest_from_json(ss.str());
  }
  auto in = open_in(dir / "corpus.csv");
  try {
    c.records = read_corpus_csv(in);
  } catch (const DataError& e) {
    throw DataError((dir / "corpus.csv").string() + ": " + e.what());
  }
  return c;
}

const CLI::IsMember kKinds({"plain", "delayed"});

// Options shared by commands that build grids.
struct GridFlags {
  std::string preset = "desk";
  std::optional<std::string> kind;
  std::optional<double> mu_lo, mu_hi, mu_step, nu_lo, nu_hi, nu_step;
  std::optional<int> replicates, len_lo, len_hi;

  void attach(CLI::App* app, const std::string& prefix = "") {
    const std::string names = fmt::format("{{{}}}", fmt::join(preset_names(), ", "));
    app->add_option("--" + prefix + "preset", preset, "Grid preset " + names)
        ->check(CLI::IsMember(preset_names()))
        ->capture_default_str();
    app->add_option("--" + prefix + "kind", kind, "Override model kind (plain|delayed)")
        ->check(kKinds);
    app->add_option("--" + prefix + "mu-lo", mu_lo, "Override lowest mu");
    app->add_option("--" + prefix + "mu-hi", mu_hi, "Override highest mu");
    app->add_option("--" + prefix + "mu-step", mu_step, "Override mu step");
    app->add_option("--" + prefix + "nu-lo", nu_lo, "Override lowest nu");
    app->add_option("--" + prefix + "nu-hi", nu_hi, "Override highest nu");
    app->add_option("--" + prefix + "nu-step", nu_step, "Override nu step");
    app->add_option("--" + prefix + "replicates", replicates, "Attempts per (mu, nu)");
    app->add_option("--" + prefix + "len-lo", len_lo, "Shortest target length");
    app->add_option("--" + prefix + "len-hi", len_hi, "Longest target length");
  }

  GridSpec resolve() const {
    GridSpec g = preset_grid(preset);
    if (kind) g.kind = parse_map_kind(*kind);
    if (mu_lo) g.mu_lo = *mu_lo;
    if (mu_hi) g.mu_hi = *mu_hi;
    if (mu_step) g.mu_step = *mu_step;
    if (nu_lo) g.nu_lo = *nu_lo;
    if (nu_hi) g.nu_hi = *nu_hi;
    if (nu_step) g.nu_step = *nu_step;
    if (replicates) g.replicates_per_pair = *replicates;
    if (len_lo) g.len_lo = *len_lo;
    if (len_hi) g.len_hi = *len_hi;
    return g;
  }
};

void write_corpus_dir(const fs::path& dir, const GridSpec& grid,
                      std::uint64_t seed, std::size_t pad, unsigned threads,
                      std::ostream& err) {
  fs::create_directories(dir);
  auto csv = open_out(dir / "corpus.csv");
  write_corpus_header(csv, pad);
  const CorpusManifest m = build_corpus(
      grid, seed, [&](const TrajectoryRecord& r) { write_corpus_row(csv, r); },
      pad, threads);
  csv.close();
  if (!csv) throw DataError("failed writing " + (dir / "corpus.csv").string());
  write_text(dir / "manifest.json", manifest_to_json(m));
  err << fmt::format("corpus {}: train {} validation {} test {}\n", dir.string(),
                     m.counts.train, m.counts.validation, m.counts.test);
}

std::vector<double> parse_triple(const std::string& text, const char* flag) {
  std::vector<double> v;
  for (auto f : split_csv_line(text)) v.push_back(parse_real(f, flag));
  if (v.size() != 3) throw DomainError(std::string(flag) + " needs three comma-separated values");
  return v;
}

nlohmann::json artifact(const std::string& kind, const fs::path& path,
                        const std::string& description) {
  return {{"kind", kind}, {"path", path.filename().string()},
          {"description", description}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fraclab: fractional and delayed logistic map laboratory", "fraclab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = FRACLAB_THREADS or hardware)");

  // trajectory ---------------------------------------------------------------
  auto* traj = app.add_subcommand("trajectory", "Print one trajectory, one value per line");
  std::string t_kind = "delayed";
  double t_mu = 0.0, t_nu = 1.0, t_x0 = 0.3;
  std::optional<double> t_y0;
  long long t_steps = 50;
  traj->add_option("--kind", t_kind, "plain or delayed")->check(kKinds)->capture_default_str();
  traj->add_option("--mu", t_mu, "Growth parameter")->required();
  traj->add_option("--nu", t_nu, "Scaling factor in (0, 1]")->required();
  traj->add_option("--x0", t_x0, "Initial condition")->required();
  traj->add_option("--y0", t_y0, "Delayed-channel start (defaults to x0)");
  traj->add_option("--steps", t_steps, "Number of terms")->capture_default_str();

  // feigenbaum ---------------------------------------------------------------
  auto* feig = app.add_subcommand("feigenbaum", "Bifurcation diagram data over a mu grid");
  SweepOptions f_opt;
  std::string f_kind = "delayed";
  std::string f_out;
  std::optional<std::string> f_svg;
  feig->add_option("--kind", f_kind, "plain or delayed")->check(kKinds)->capture_default_str();
  feig->add_option("--nu", f_opt.nu, "Scaling factor")->required();
  feig->add_option("--x0", f_opt.x0, "Initial condition (y0 = x0)")->capture_default_str();
  feig->add_option("--mu-lo", f_opt.mu_lo)->capture_default_str();
  feig->add_option("--mu-hi", f_opt.mu_hi)->capture_default_str();
  feig->add_option("--mu-step", f_opt.mu_step)->capture_default_str();
  feig->add_option("--total", f_opt.n_total, "Terms per mu")->capture_default_str();
  feig->add_option("--keep", f_opt.n_keep, "Trailing terms kept")->capture_default_str();
  feig->add_option("--out", f_out, "CSV output path")->required();
  feig->add_option("--svg", f_svg, "Optional SVG rendering path");

  // corpus ---------------------------------------------------------------------
  auto* corp = app.add_subcommand("corpus", "Generate a labeled, split trajectory corpus");
  GridFlags c_grid;
  c_grid.attach(corp);
  std::uint64_t c_seed = 42;
  std::size_t c_pad = kDefaultPadLength;
  std::string c_out;
  corp->add_option("--seed", c_seed, "Master seed")->capture_default_str();
  corp->add_option("--pad", c_pad, "Padded length")->capture_default_str();
  corp->add_option("--out", c_out, "Output directory")->required();

  // classify-corpus --------------------------------------------------------------
  auto* cls = app.add_subcommand("classify-corpus",
                                 "Balanced delayed-vs-plain corpus from two grids");
  std::optional<std::string> k_delayed_dir, k_plain_dir;
  GridFlags k_delayed, k_plain;
  k_delayed.preset = "desk";
  k_plain.preset = "desk-plain";
  k_delayed.attach(cls, "delayed-");
  k_plain.attach(cls, "plain-");
  std::string k_quota = "5000,1000,1000";
  std::uint64_t k_seed = 42;
  std::string k_out;
  cls->add_option("--delayed-corpus", k_delayed_dir, "Existing delayed corpus directory");
  cls->add_option("--plain-corpus", k_plain_dir, "Existing plain corpus directory");
  cls->add_option("--quota", k_quota, "Per-class train,validation,test counts")
      ->capture_default_str();
  cls->add_option("--seed", k_seed, "Master seed")->capture_default_str();
  cls->add_option("--out", k_out, "Output directory")->required();

  // train --------------------------------------------------------------------------
  auto* trn = app.add_subcommand("train", "Train the convolutional-recurrent model");
  std::string r_corpus, r_target = "mu", r_out;
  std::optional<std::string> r_report;
  nn::NetworkConfig r_net;
  TrainConfig r_cfg;
  trn->add_option("--corpus", r_corpus, "Corpus directory")->required();
  trn->add_option("--target", r_target, "mu, nu, both or delay")
      ->check(CLI::IsMember({"mu", "nu", "both", "delay"}))
      ->capture_default_str();
  trn->add_option("--out", r_out, "Checkpoint path")->required();
  trn->add_option("--report", r_report, "Training report JSON path");
  trn->add_option("--conv1", r_net.conv1_filters)->capture_default_str();
  trn->add_option("--conv2", r_net.conv2_filters)->capture_default_str();
  trn->add_option("--kernel", r_net.kernel_size)->capture_default_str();
  trn->add_option("--lstm-layers", r_net.lstm_layers)->capture_default_str();
  trn->add_option("--lstm-units", r_net.lstm_units)->capture_default_str();
  trn->add_option("--dropout", r_net.dropout_rate)->capture_default_str();
  trn->add_option("--dense", r_net.dense_units)->capture_default_str();
  trn->add_option("--epochs", r_cfg.max_epochs)->capture_default_str();
  trn->add_option("--patience", r_cfg.patience)->capture_default_str();
  trn->add_option("--batch", r_cfg.batch_size)->capture_default_str();
  trn->add_option("--lr", r_cfg.adam.learning_rate)->capture_default_str();
  trn->add_option("--seed", r_cfg.seed)->capture_default_str();

  // evaluate -------------------------------------------------------------------------
  auto* evl = app.add_subcommand("evaluate", "Predict a corpus split with a checkpoint");
  std::string e_corpus, e_ckpt, e_split = "test", e_out;
  evl->add_option("--corpus", e_corpus, "Corpus directory")->required();
  evl->add_option("--checkpoint", e_ckpt, "Checkpoint path")->required();
  evl->add_option("--split", e_split, "train, validation or test")
      ->check(CLI::IsMember({"train", "validation", "test"}))
      ->capture_default_str();
  evl->add_option("--out", e_out, "Predictions CSV path")->required();

  // roc ----------------------------------------------------------------------------
  auto* rocc = app.add_subcommand("roc", "ROC curve and AUC of delay predictions");
  std::string o_pred, o_out;
  rocc->add_option("--predictions", o_pred, "Predictions CSV (target delay)")->required();
  rocc->add_option("--out", o_out, "Output directory")->required();

  // report ---------------------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "Error breakdowns, plots and index");
  std::string p_corpus, p_out;
  std::vector<std::string> p_preds;
  double p_threshold = 0.05;
  int p_min_length = 15;
  rep->add_option("--corpus", p_corpus, "Corpus directory")->required();
  rep->add_option("--predictions", p_preds, "Predictions CSV file(s)")->required();
  rep->add_option("--threshold", p_threshold, "High-error cut for histograms")
      ->capture_default_str();
  rep->add_option("--min-length", p_min_length,
                  "Length cut for the second histogram set")
      ->capture_default_str();
  rep->add_option("--out", p_out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (const auto* sub : app.get_subcommands()) {
    err << "# resolved config: " << sub->get_name() << "\n"
        << sub->config_to_str(true, false);
  }
  const unsigned workers = resolve_threads(threads);
  err << "# workers = " << workers << "\n";

  try {
    if (*traj) {
      const MapKind kind = parse_map_kind(t_kind);
      const Trajectory t =
          kind == MapKind::Plain
              ? generate_plain(t_mu, t_nu, t_x0, t_steps)
              : generate_delayed(t_mu, t_nu, t_x0, t_y0.value_or(t_x0), t_steps);
      for (double v : t.values) out << format_shortest(v) << '\n';
      if (t.truncated) {
        err << fmt::format("trajectory left [-1, 3] after {} terms\n", t.values.size());
      }
    } else if (*feig) {
      f_opt.kind = parse_map_kind(f_kind);
      f_opt.threads = workers;
      const auto s = sweep(f_opt);
      auto f = open_out(f_out);
      write_sweep_csv(s, f);
      if (f_svg) write_text(*f_svg, svg::feigenbaum(s));
      err << fmt::format("{} mu values written to {}\n", s.columns.size(), f_out);
    } else if (*corp) {
      write_corpus_dir(c_out, c_grid.resolve(), c_seed, c_pad, workers, err);
    } else if (*cls) {
      const auto q = parse_triple(k_quota, "--quota");
      const SplitQuota quota{static_cast<std::size_t>(q[0]),
                             static_cast<std::size_t>(q[1]),
                             static_cast<std::size_t>(q[2])};
      auto obtain = [&](const std::optional<std::string>& dir, const GridFlags& flags,
                        std::uint64_t salt) {
        if (dir) {
          auto loaded = load_corpus_dir(*dir);
          return Corpus{loaded.manifest, std::move(loaded.records)};
        }
        return build_corpus(flags.resolve(), derive_seed(k_seed, salt),
                            kDefaultPadLength, workers);
      };
      const Corpus delayed = obtain(k_delayed_dir, k_delayed, 1);
      const Corpus plain = obtain(k_plain_dir, k_plain, 2);
      const auto combined = build_classification_corpora(delayed, plain, quota, k_seed);
      fs::create_directories(k_out);
      auto f = open_out(fs::path(k_out) / "corpus.csv");
      write_corpus_csv(f, combined.records, combined.pad_length);
      write_text(fs::path(k_out) / "manifest.json",
                 classification_manifest_to_json(combined));
      err << fmt::format("classification corpus {}: train {} validation {} test {}\n",
                         k_out, combined.counts.train, combined.counts.validation,
                         combined.counts.test);
    } else if (*trn) {
      r_cfg.target = parse_target(r_target);
      r_cfg.threads = workers;
      r_cfg.checkpoint_path = r_out;
      if (fs::path(r_out).has_parent_path()) fs::create_directories(fs::path(r_out).parent_path());
      const auto corpus = load_corpus_dir(r_corpus);
      r_net.input_length = corpus.manifest.pad_length;
      const auto report = train(corpus.records, r_net, r_cfg, [&](const EpochMetrics& m) {
        err << fmt::format("epoch {:3d}  train {:.6f}  validation {:.6f}\n", m.epoch,
                           m.train_loss, m.validation_metric);
      });
      const std::string json = train_report_to_json(report, r_cfg);
      if (r_report) write_text(*r_report, json);
      out << json;
    } else if (*evl) {
      const auto corpus = load_corpus_dir(e_corpus);
      const auto ck = nn::load_checkpoint(e_ckpt);
      const Split split = parse_split(e_split);
      std::vector<TrajectoryRecord> chosen;
      std::vector<std::size_t> ids;
      for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        if (corpus.records[i].split != split) continue;
        chosen.push_back(corpus.records[i]);
        ids.push_back(i);
      }
      if (chosen.empty()) throw DataError("split " + e_split + " is empty in " + e_corpus);
      const Target target = parse_target(ck.target.empty() ? "mu" : ck.target);
      const auto outputs = predict(ck, chosen, workers);
      const auto rows = prediction_rows(chosen, outputs, target, ids);
      auto f = open_out(e_out);
      write_predictions_csv(f, rows);
      const auto report = build_report(corpus.records, rows);
      for (Parameter p : {Parameter::Mu, Parameter::Nu}) {
        if (report.with(p).empty()) continue;
        const auto bins = mae_by_length(report, p);
        out << fmt::format("MAE({}) all {:.6f}\n", to_string(p), bins.back().mae);
      }
      if (target == Target::DelayClass) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& r : rows) {
          scores.push_back(r.prediction);
          labels.push_back(r.truth > 0.5);
        }
        out << fmt::format("AUC {:.6f} accuracy {:.6f}\n", roc_auc(scores, labels).auc,
                           accuracy_at_half(scores, labels));
      }
    } else if (*rocc) {
      auto in = open_in(o_pred);
      const auto rows = read_predictions_csv(in);
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& r : rows) {
        if (r.target != "delay") continue;
        scores.push_back(r.prediction);
        labels.push_back(r.truth > 0.5);
      }
      const auto curve = roc_auc(scores, labels);
      fs::create_directories(o_out);
      auto f = open_out(fs::path(o_out) / "roc.csv");
      write_roc_csv(f, curve);
      write_text(fs::path(o_out) / "roc.svg", svg::roc(curve));
      out << fmt::format("AUC {:.6f} accuracy {:.6f} positives {} negatives {}\n",
                         curve.auc, accuracy_at_half(scores, labels), curve.positives,
                         curve.negatives);
    } else if (*rep) {
      const auto corpus = load_corpus_dir(p_corpus);
      std::vector<PredictionRow> rows;
      for (const auto& path : p_preds) {
        auto in = open_in(path);
        auto part = read_predictions_csv(in);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      const auto report = build_report(corpus.records, rows);
      const fs::path dir = p_out;
      fs::create_directories(dir);
      nlohmann::json index = nlohmann::json::array();
      auto emit = [&](const std::string& name, const std::string& kind,
                      const std::string& text, const std::string& what) {
        write_text(dir / name, text);
        index.push_back(artifact(kind, dir / name, what));
      };

      std::vector<LengthBin> by_len[2];
      for (Parameter p : {Parameter::Mu, Parameter::Nu}) {
        if (report.with(p).empty()) continue;
        const std::string n(to_string(p));
        by_len[p == Parameter::Nu] = mae_by_length(report, p);

        std::ostringstream csv;
        const auto q = quartile_curves(report, p);
        write_quartiles_csv(csv, q);
        emit("quartiles_" + n + ".csv", "csv", csv.str(), "absolute error quartiles per " + n);
        emit("quartiles_" + n + ".svg", "svg", svg::quartiles(n, q),
             "Q1/Q2/Q3 curves per " + n);

        csv.str("");
        const auto hm = heatmap(report, p);
        write_heatmap_csv(csv, hm);
        emit("heatmap_" + n + ".csv", "csv", csv.str(), "mean absolute error by x0 and " + n);
        emit("heatmap_" + n + ".svg", "svg",
             svg::heatmap({"Mean |error| of " + n + " by x0", n, "x0"}, hm.rows, hm.cols,
                          hm.mean_error),
             "heat map of mean absolute error");

        csv.str("");
        const auto box = box_stats(report, p);
        write_box_csv(csv, box);
        emit("box_" + n + ".csv", "csv", csv.str(), "box statistics of |error| per x0");
        emit("box_" + n + ".svg", "svg",
             svg::boxplot({"|error| of " + n + " by x0", "x0", "absolute error"}, box),
             "box plot per x0");

        for (int min_len : {0, p_min_length}) {
          const auto h = high_error_histograms(report, p, p_threshold, min_len);
          const std::string suffix = min_len ? fmt::format("_len_gt{}", min_len) : "";
          csv.str("");
          write_histogram_csv(csv, h);
          emit("histograms_" + n + suffix + ".csv", "csv", csv.str(),
               fmt::format("covariates of records with |error| > {}", p_threshold));
          for (const auto& [cov, hist] :
               {std::pair{"x0", &h.x0}, std::pair{"length", &h.length},
                std::pair{"mu", &h.mu}, std::pair{"nu", &h.nu}}) {
            emit("histogram_" + n + suffix + "_" + cov + ".svg", "svg",
                 svg::histogram({fmt::format("{} of records with {} error > {}", cov, n,
                                             p_threshold),
                                 cov, "count"},
                                *hist),
                 "high-error histogram");
          }
        }

        const double lo = p == Parameter::Mu ? corpus.manifest.grid.mu_lo : 0.0;
        const double hi = p == Parameter::Mu ? corpus.manifest.grid.mu_hi : 1.0;
        for (auto [min_len, max_len, suffix] :
             {std::tuple{0, 1 << 30, std::string()},
              std::tuple{40, 50, std::string("_len40_50")}}) {
          const auto g = truth_vs_prediction(report, p, lo, hi, 50, min_len, max_len);
          csv.str("");
          write_density_csv(csv, g);
          emit("density_" + n + suffix + ".csv", "csv", csv.str(),
               "truth vs prediction counts");
          emit("density_" + n + suffix + ".svg", "svg",
               svg::density("Truth vs predicted " + n, g), "truth vs prediction density");
        }
      }
      if (!by_len[0].empty() || !by_len[1].empty()) {
        std::ostringstream csv;
        write_length_table_csv(csv, by_len[0], by_len[1]);
        emit("mae_by_length.csv", "csv", csv.str(), "MAE per trajectory length bin");
        out << csv.str();
      }

      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& r : report.records) {
        if (!r.delay_score) continue;
        scores.push_back(*r.delay_score);
        labels.push_back(r.kind == MapKind::Delayed);
      }
      if (!scores.empty()) {
        const auto curve = roc_auc(scores, labels);
        std::ostringstream csv;
        write_roc_csv(csv, curve);
        emit("roc.csv", "csv", csv.str(), "ROC points");
        emit("roc.svg", "svg", svg::roc(curve), "ROC curve");
        out << fmt::format("AUC {:.6f} accuracy {:.6f}\n", curve.auc,
                           accuracy_at_half(scores, labels));
      }
      write_text(dir / "index.json",
                 nlohmann::json{{"records", report.records.size()}, {"artifacts", index}}
                         .dump(2) +
                     "\n");
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace fraclab::cli
