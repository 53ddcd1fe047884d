// Command-line front end. Every subcommand prints a human-readable table and
// writes the same numbers as CSV under --out.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "stnet/data.hpp"
#include "stnet/errors.hpp"
#include "stnet/harness.hpp"
#include "stnet/training.hpp"

namespace fs = std::filesystem;
using namespace stnet;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::optional<sim::LoadCondition> trial_option(const std::string& label) {
  if (label.empty()) return std::nullopt;
  return sim::parse_load(label);
}

void print_table(const std::string& title, const std::string& body, const fs::path& csv) {
  std::cout << title << "\n" << body << "csv: " << csv.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal shape estimation for tendon-driven continuum robots"};
  app.require_subcommand(1);

  // gen
  std::string gen_profile = "desk";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Simulate, render and write a dataset");
  gen->add_option("--profile", gen_profile, "desk | tiny | paper")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out)->required();

  // pretrain
  std::string pre_data;
  std::string pre_out = "runs/sfe";
  training::PretrainConfig pre_cfg;
  auto* pre = app.add_subcommand("pretrain", "Unsupervised encoder pretraining");
  pre->add_option("--data", pre_data)->required();
  pre->add_option("--epochs", pre_cfg.epochs)->capture_default_str();
  pre->add_option("--alpha", pre_cfg.alpha)->capture_default_str();
  pre->add_option("--beta", pre_cfg.beta)->capture_default_str();
  pre->add_option("--lr", pre_cfg.lr)->capture_default_str();
  pre->add_option("--batch", pre_cfg.batch)->capture_default_str();
  pre->add_option("--max-images", pre_cfg.max_images, "0 = whole train split")->capture_default_str();
  pre->add_option("--seed", pre_cfg.seed)->capture_default_str();
  pre->add_option("--out", pre_out)->capture_default_str();

  // train
  std::string tr_data;
  std::string tr_variant = "full";
  std::string tr_sfe;
  std::string tr_trial;
  std::string tr_out;
  training::TrainConfig tr_cfg;
  auto* tr = app.add_subcommand("train", "Train one network variant");
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--variant", tr_variant, "full | tfe_only | sfe_only | ff_noattn")->capture_default_str();
  tr->add_option("--epochs", tr_cfg.epochs)->capture_default_str();
  tr->add_option("--lr", tr_cfg.lr)->capture_default_str();
  tr->add_option("--batch", tr_cfg.batch)->capture_default_str();
  tr->add_option("--seed", tr_cfg.seed)->capture_default_str();
  tr->add_option("--sfe-ckpt", tr_sfe, "encoder checkpoint from pretrain");
  tr->add_option("--trial", tr_trial, "restrict to one load condition");
  tr->add_option("--out", tr_out, "default runs/<variant>_s<seed>");

  // eval
  std::string ev_ckpt;
  std::string ev_data;
  std::string ev_split = "test";
  std::string ev_trial;
  int ev_table = 1;
  std::string ev_out = ".";
  auto* ev = app.add_subcommand("eval", "Evaluate a trained checkpoint");
  ev->add_option("--ckpt", ev_ckpt)->required();
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--split", ev_split, "train | test | all")->capture_default_str();
  ev->add_option("--table", ev_table)->check(CLI::IsMember({1, 2}))->capture_default_str();
  ev->add_option("--trial", ev_trial, "restrict to one load condition");
  ev->add_option("--out", ev_out)->capture_default_str();

  // ablate
  std::string ab_data;
  std::string ab_sfe;
  std::string ab_trial;
  std::string ab_out = "runs/ablation";
  training::TrainConfig ab_cfg;
  std::size_t ab_pre_epochs = 3;
  auto* ab = app.add_subcommand("ablate", "Train and compare all four variants");
  ab->add_option("--data", ab_data)->required();
  ab->add_option("--epochs", ab_cfg.epochs)->capture_default_str();
  ab->add_option("--seed", ab_cfg.seed)->capture_default_str();
  ab->add_option("--lr", ab_cfg.lr)->capture_default_str();
  ab->add_option("--batch", ab_cfg.batch)->capture_default_str();
  ab->add_option("--sfe-ckpt", ab_sfe, "reuse an encoder instead of pretraining one");
  ab->add_option("--pretrain-epochs", ab_pre_epochs)->capture_default_str();
  ab->add_option("--trial", ab_trial, "restrict to one load condition");
  ab->add_option("--out", ab_out)->capture_default_str();

  // reconstruct
  std::string rc_ckpt;
  std::string rc_data;
  std::size_t rc_index = 0;
  std::string rc_trial = "none";
  std::string rc_out = ".";
  auto* rc = app.add_subcommand("reconstruct", "Fit a Bezier backbone to one sample's predicted markers");
  rc->add_option("--ckpt", rc_ckpt)->required();
  rc->add_option("--data", rc_data)->required();
  rc->add_option("--index", rc_index)->capture_default_str();
  rc->add_option("--trial", rc_trial)->capture_default_str();
  rc->add_option("--out", rc_out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const fs::path out(gen_out);
      data::generate(data::default_generation(gen_profile, gen_seed), out);
      const data::Dataset ds = data::Dataset::open(out);
      const data::AuditReport audit = data::audit(ds);
      std::cout << "generated " << ds.size() << " samples in " << ds.trials().size() << " trials at "
                << out.string() << "\naudit " << audit.passed << "/" << audit.checked << " consistent\n";
      std::ostringstream csv;
      csv << "trial,samples\n";
      for (const auto& t : ds.trials()) csv << sim::to_string(t.load) << ',' << t.records.size() << '\n';
      std::cout << csv.str();
      return audit.passed == audit.checked ? 0 : 1;
    }

    if (*pre) {
      const data::Dataset ds = data::Dataset::open(pre_data);
      const training::PretrainResult result = training::pretrain_sfe(ds, pre_cfg, &std::cerr);
      const fs::path out(pre_out);
      save_checkpoint(out / "checkpoint", training::encoder_checkpoint(result, pre_cfg));
      const std::string csv = training::pretrain_log_csv(result.log);
      write_text(out / "pretrain_log.csv", csv);
      print_table("pretraining loss", csv, out / "pretrain_log.csv");
      return 0;
    }

    if (*tr) {
      const data::Dataset ds = data::Dataset::open(tr_data);
      tr_cfg.variant = net::parse_variant(tr_variant);
      tr_cfg.trial = trial_option(tr_trial);
      std::optional<ParamStore> encoder;
      if (!tr_sfe.empty()) {
        encoder = training::load_encoder(load_checkpoint(tr_sfe), net::profile_by_name(ds.config().profile));
      }
      training::TrainResult result =
          training::train(ds, tr_cfg, encoder ? &*encoder : nullptr, nullptr, &std::cerr);
      const fs::path out =
          tr_out.empty() ? fs::path("runs") / (tr_variant + "_s" + std::to_string(tr_cfg.seed)) : fs::path(tr_out);
      save_checkpoint(out / "checkpoint", training::to_checkpoint(result.model));
      write_text(out / "loss_log.csv", training::train_log_csv(result.log));
      const harness::Evaluation ev = harness::evaluate(result.model, ds, result.split.test);
      const std::vector<std::pair<std::string, metrics::MetricsTable>> cols{{tr_variant, ev.overall}};
      write_text(out / "metrics.csv", metrics::table1_csv(cols));
      print_table("test split", metrics::table1_text(cols), out / "metrics.csv");
      return 0;
    }

    if (*ev) {
      const data::Dataset ds = data::Dataset::open(ev_data);
      training::Model model = training::model_from_checkpoint(load_checkpoint(ev_ckpt));
      if (model.cfg.profile != ds.config().profile) {
        throw ConfigError("checkpoint profile '" + model.cfg.profile + "' does not match dataset profile '" +
                          ds.config().profile + "'");
      }
      const auto refs = harness::select_split(ds, ev_split, trial_option(ev_trial));
      const harness::Evaluation result = harness::evaluate(model, ds, refs);
      const std::string name = net::to_string(model.variant);
      const fs::path csv = fs::path(ev_out) / ("eval_" + ev_split + "_table" + std::to_string(ev_table) + ".csv");
      if (ev_table == 1) {
        const std::vector<std::pair<std::string, metrics::MetricsTable>> cols{{name, result.overall}};
        write_text(csv, metrics::table1_csv(cols));
        print_table(ev_split + " split", metrics::table1_text(cols), csv);
      } else {
        const std::vector<std::pair<std::string, std::vector<metrics::LoadRow>>> cols{{name, result.per_load}};
        write_text(csv, metrics::table2_csv(cols));
        print_table(ev_split + " split, RMSE per load", metrics::table2_text(cols), csv);
      }
      return 0;
    }

    if (*ab) {
      const data::Dataset ds = data::Dataset::open(ab_data);
      const net::NetConfig cfg = net::profile_by_name(ds.config().profile);
      const fs::path out(ab_out);
      ParamStore encoder;
      if (!ab_sfe.empty()) {
        encoder = training::load_encoder(load_checkpoint(ab_sfe), cfg);
      } else {
        training::PretrainConfig pc;
        pc.epochs = ab_pre_epochs;
        pc.seed = ab_cfg.seed;
        const training::PretrainResult pr = training::pretrain_sfe(ds, pc, &std::cerr);
        const Checkpoint ckpt = training::encoder_checkpoint(pr, pc);
        save_checkpoint(out / "sfe", ckpt);
        write_text(out / "pretrain_log.csv", training::pretrain_log_csv(pr.log));
        encoder = training::load_encoder(ckpt, cfg);
      }
      ab_cfg.trial = trial_option(ab_trial);
      const auto runs = harness::ablate(ds, encoder, ab_cfg, &std::cerr);
      for (const auto& r : runs) {
        write_text(out / (net::to_string(r.variant) + "_loss_log.csv"), training::train_log_csv(r.run.log));
      }
      write_text(out / "table1.csv", metrics::table1_csv(harness::table1_columns(runs)));
      write_text(out / "table2.csv", metrics::table2_csv(harness::table2_columns(runs)));
      print_table("Table 1: test RMSE / Max per reported marker", metrics::table1_text(harness::table1_columns(runs)),
                  out / "table1.csv");
      print_table("Table 2: test RMSE per load condition", metrics::table2_text(harness::table2_columns(runs)),
                  out / "table2.csv");
      return 0;
    }

    if (*rc) {
      const data::Dataset ds = data::Dataset::open(rc_data);
      training::Model model = training::model_from_checkpoint(load_checkpoint(rc_ckpt));
      const auto trial = ds.trial_index(sim::parse_load(rc_trial));
      if (!trial) throw ConfigError("dataset has no trial '" + rc_trial + "'");
      if (rc_index >= ds.trials()[*trial].records.size()) {
        throw ConfigError("index " + std::to_string(rc_index) + " out of range");
      }
      const harness::Reconstruction r = harness::reconstruct(model, ds, {*trial, rc_index});
      const fs::path csv = fs::path(rc_out) / ("reconstruct_" + rc_trial + "_" + std::to_string(rc_index) + ".csv");
      write_text(csv, harness::reconstruction_csv(r));
      print_table("reconstruction " + rc_trial + "/" + std::to_string(rc_index), harness::reconstruction_text(r), csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
