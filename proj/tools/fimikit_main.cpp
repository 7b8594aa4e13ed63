// fimikit: autonomous, auditable investigation of coordinated inauthentic
// behavior over social-media corpora, with DISARM technique attribution and
// statistically verified atomic evidence.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>

#include "fimikit/config.hpp"
#include "fimikit/engine.hpp"
#include "fimikit/provider.hpp"
#include "fimikit/remote_provider.hpp"
#include "fimikit/report.hpp"
#include "fimikit/store.hpp"
#include "fimikit/synth.hpp"
#include "fimikit/taxonomy.hpp"
#include "fimikit/verifier.hpp"

namespace {

using namespace fimikit;

std::unique_ptr<Provider> make_provider(const AppConfig& cfg, const Taxonomy& taxonomy) {
  if (cfg.run.provider_kind == "scripted") {
    return std::make_unique<ScriptedProvider>(Playbook::load_file(cfg.playbook_path),
                                              cfg.run.pass_threshold, cfg.run.fail_threshold);
  }
  return std::make_unique<RemoteProvider>(cfg.remote, &taxonomy);
}

void print_summary(const RunSummary& s) {
  if (!s.notice.empty()) std::cout << s.notice << "\n";
  std::cout << "run " << s.run_id << ": " << s.iterations_executed << " iteration(s), findings "
            << s.findings_pass << " PASS / " << s.findings_inconclusive << " INCONCLUSIVE / "
            << s.findings_fail << " FAIL";
  if (s.failed_iterations > 0) std::cout << ", " << s.failed_iterations << " failed iteration(s)";
  std::cout << ", " << s.claims << " atomic claim(s)\n";
}

int run_command(const std::string& config_path, const std::string& dataset_override,
                std::uint64_t seed_override, bool seed_set, int max_iterations_override,
                int stop_after, bool auto_verify, bool auto_report,
                const std::string& report_out) {
  AppConfig cfg = AppConfig::load_file(config_path);
  if (!dataset_override.empty()) cfg.run.dataset = dataset_override;
  if (seed_set) cfg.run.seed = seed_override;
  if (max_iterations_override > 0) cfg.run.max_iterations = max_iterations_override;
  cfg.validate();
  cfg.run.validate();

  Taxonomy taxonomy = Taxonomy::load_file(cfg.taxonomy_path);
  Store store(cfg.store_path);
  auto provider = make_provider(cfg, taxonomy);
  Engine engine(store, taxonomy, *provider, cfg.run, cfg.limits, cfg.run_config_hash());
  if (stop_after > 0) engine.set_stop_after(stop_after);

  const RunSummary summary = engine.run();
  print_summary(summary);

  if (auto_verify || auto_report) {
    const int n = verify_run(store, summary.run_id, cfg.limits);
    std::cout << "verified " << n << " claim(s)\n";
  }
  if (auto_report) {
    const std::string doc =
        export_report(store, taxonomy, summary.run_id, ReportFormat::markdown, cfg.pricing);
    if (report_out.empty()) {
      std::cout << doc;
    } else {
      write_file(report_out, doc);
      std::cout << "report written to " << report_out << "\n";
    }
  }
  const bool stopped_on_request = stop_after > 0 && !summary.completed;
  return summary.completed || stopped_on_request ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fimikit: DISARM-guided investigation of coordinated inauthentic behavior"};
  app.require_subcommand(1);

  std::string config_path, store_path, taxonomy_path;
  std::string manifest_path, accounts_path, messages_path;
  std::string spec_path, out_path, format = "markdown";
  std::string dataset_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int max_iterations_override = 0;
  std::int64_t run_id = 0, evidence_id = 0;
  int stop_after = 0;
  bool auto_verify = false, auto_report = false, force = false;

  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic campaign");
  synth_cmd->add_option("--spec", spec_path, "Campaign spec file")->required();
  synth_cmd->add_option("--out", out_path, "Output directory")->required();

  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest a dataset into the store");
  ingest_cmd->add_option("--config", config_path, "App config file");
  ingest_cmd->add_option("--store", store_path, "Store path (overrides config)");
  ingest_cmd->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  ingest_cmd->add_option("--accounts", accounts_path, "Accounts JSONL file")->required();
  ingest_cmd->add_option("--messages", messages_path, "Messages JSONL file")->required();

  auto* tax_cmd = app.add_subcommand("taxonomy-check", "Load and validate a taxonomy file");
  tax_cmd->add_option("--taxonomy", taxonomy_path, "Taxonomy file")->required();

  auto* run_cmd = app.add_subcommand("run", "Execute a full investigation run");
  run_cmd->add_option("--config", config_path, "App config file")->required();
  run_cmd->add_option("--dataset", dataset_override, "Dataset override");
  run_cmd->add_option("--seed", seed_override, "Seed override")
      ->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--max-iterations", max_iterations_override, "Iteration cap override");
  run_cmd->add_option("--stop-after", stop_after,
                      "Stop after this iteration commits (resume later)");
  run_cmd->add_flag("--auto-verify", auto_verify, "Verify all claims after the run");
  run_cmd->add_flag("--auto-report", auto_report, "Write a markdown report after verification");
  run_cmd->add_option("--out", out_path, "Report output path (with --auto-report)");

  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  resume_cmd->add_option("--config", config_path, "App config file")->required();
  resume_cmd->add_option("--run-id", run_id, "Run id")->required();
  resume_cmd->add_option("--stop-after", stop_after, "Stop after this iteration commits");

  auto* verify_cmd = app.add_subcommand("verify", "Verify all unverified atomic claims of a run");
  verify_cmd->add_option("--config", config_path, "App config file")->required();
  verify_cmd->add_option("--run-id", run_id, "Run id")->required();
  verify_cmd->add_flag("--force", force, "Discard existing verifications and re-verify");

  auto* report_cmd = app.add_subcommand("report", "Export a run report");
  report_cmd->add_option("--config", config_path, "App config file")->required();
  report_cmd->add_option("--run-id", run_id, "Run id")->required();
  report_cmd->add_option("--format", format, "markdown | structured")
      ->check(CLI::IsMember({"markdown", "structured"}));
  report_cmd->add_option("--out", out_path, "Output path (stdout when omitted)");

  auto* trace_cmd = app.add_subcommand("trace", "Trace one atomic evidence id back to its technique");
  trace_cmd->add_option("--config", config_path, "App config file")->required();
  trace_cmd->add_option("--evidence-id", evidence_id, "Atomic evidence id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage/help text
    return code == 0 ? 0 : 1;     // flag mistakes are user errors
  }

  try {
    if (synth_cmd->parsed()) {
      const CampaignSpec spec = CampaignSpec::load_file(spec_path);
      const Campaign campaign = generate_campaign(spec);
      write_campaign(campaign, out_path);
      std::cout << "campaign '" << spec.name << "': " << campaign.accounts.size()
                << " accounts, " << campaign.messages.size() << " messages -> " << out_path
                << "\n";
      return 0;
    }
    if (ingest_cmd->parsed()) {
      std::string store_file = store_path;
      if (store_file.empty()) {
        if (config_path.empty()) {
          throw UserError("ingest: provide --store or --config");
        }
        store_file = AppConfig::load_file(config_path).store_path;
      }
      const DatasetManifest manifest = DatasetManifest::load_file(manifest_path);
      Store store(store_file);
      const IngestReport report = store.ingest_dataset(manifest, accounts_path, messages_path);
      std::cout << report.to_json().dump(2) << "\n";
      return 0;
    }
    if (tax_cmd->parsed()) {
      std::vector<std::string> warnings;
      const Taxonomy taxonomy = Taxonomy::load_file(taxonomy_path, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "taxonomy ok: " << taxonomy.size() << " technique(s), version '"
                << taxonomy.version() << "'\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      return run_command(config_path, dataset_override, seed_override, seed_set,
                         max_iterations_override, stop_after, auto_verify, auto_report, out_path);
    }
    if (resume_cmd->parsed()) {
      AppConfig cfg = AppConfig::load_file(config_path);
      cfg.validate();
      Taxonomy taxonomy = Taxonomy::load_file(cfg.taxonomy_path);
      Store store(cfg.store_path);
      auto provider = make_provider(cfg, taxonomy);
      Engine engine(store, taxonomy, *provider, cfg.run, cfg.limits, cfg.run_config_hash());
      if (stop_after > 0) engine.set_stop_after(stop_after);
      const RunSummary summary = engine.resume(run_id);
      print_summary(summary);
      const bool stopped_on_request = stop_after > 0 && !summary.completed;
      return summary.completed || stopped_on_request ? 0 : 2;
    }
    if (verify_cmd->parsed()) {
      AppConfig cfg = AppConfig::load_file(config_path);
      Store store(cfg.store_path);
      const int n = verify_run(store, run_id, cfg.limits, force);
      std::cout << "verified " << n << " claim(s)\n";
      return 0;
    }
    if (report_cmd->parsed()) {
      AppConfig cfg = AppConfig::load_file(config_path);
      Taxonomy taxonomy = Taxonomy::load_file(cfg.taxonomy_path);
      Store store(cfg.store_path);
      const ReportFormat fmt =
          format == "structured" ? ReportFormat::structured : ReportFormat::markdown;
      const std::string doc = export_report(store, taxonomy, run_id, fmt, cfg.pricing);
      if (out_path.empty()) {
        std::cout << doc;
      } else {
        write_file(out_path, doc);
        std::cout << "report written to " << out_path << "\n";
      }
      return 0;
    }
    if (trace_cmd->parsed()) {
      AppConfig cfg = AppConfig::load_file(config_path);
      Taxonomy taxonomy = Taxonomy::load_file(cfg.taxonomy_path);
      Store store(cfg.store_path);
      std::cout << trace_to_text(trace(store, taxonomy, evidence_id));
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
    return 1;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
