/* Copyright 2026 The ergoeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end. Exit codes: 0 success, 1 data or validation
// error, 2 usage error.

#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ergoeval/ergoeval.hpp"

namespace ergoeval {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

namespace fs = std::filesystem;

inline ReportFormat parse_format(const std::string& s) {
  return s == "tsv" ? ReportFormat::kTsv : ReportFormat::kText;
}

inline std::vector<Task> parse_tasks(const std::string& s) {
  if (s == "all") return {Task::kCaption, Task::kVqa};
  return {*parse_task_name(s)};
}

struct Options {
  // shared
  std::string dataset, out, json_out, format = "text";
  std::size_t jobs = 4;
  // split
  std::int64_t test_count = 0;
  std::uint64_t seed = 0;
  std::string test_ids, finetune_out, test_out;
  // infer
  std::string task = "caption", backend = "stub", endpoint, model_id = "stub", auth_env,
              cache_dir, image_root = ".";
  double timeout = 60.0;
  int retries = 3;
  // evaluate
  std::string predictions, summary_out, lm_train, lm, lm_out;
  // compare
  std::string finetuned, general, finetuned_summary, general_summary;
  std::string finetuned_label = "fine-tuned", general_label = "general";
  // report
  std::string report;
  // survey
  std::string responses, plan;
};

inline int cmd_validate(const Options& o, std::ostream& out) {
  const auto d = load_dataset(o.dataset);
  std::size_t captions = 0, vqa = 0;
  for (const auto& a : d.annotations()) (a.task == Task::kCaption ? captions : vqa)++;
  out << "valid: " << d.images().size() << " images, " << d.annotations().size()
      << " annotations (" << captions << " caption, " << vqa << " vqa), partition "
      << to_string(d.partition()) << "\n";
  return kExitOk;
}

inline int cmd_split(const Options& o, std::ostream& out) {
  const auto d = load_dataset(o.dataset);
  const auto [fine_tune, test] = o.test_ids.empty()
                                     ? split_dataset(d, o.test_count, o.seed)
                                     : split_dataset_by_ids(d, load_id_list(o.test_ids));
  write_dataset(fine_tune, o.finetune_out);
  write_dataset(test, o.test_out);
  out << "split: " << fine_tune.images().size() << " fine-tune images, " << test.images().size()
      << " test images\n";
  return kExitOk;
}

inline int cmd_infer(const Options& o, std::ostream& out) {
  const auto d = load_dataset(o.dataset);
  BackendConfig cfg;
  cfg.kind = o.backend == "remote" ? BackendKind::kRemoteHttp : BackendKind::kStub;
  cfg.endpoint = o.endpoint;
  cfg.auth_token_env = o.auth_env;
  cfg.timeout_seconds = o.timeout;
  cfg.max_in_flight = static_cast<int>(o.jobs);
  cfg.max_retries = o.retries;
  cfg.model_id = o.model_id;
  auto backend = make_backend(cfg);
  std::optional<ResponseCache> cache;
  if (!o.cache_dir.empty()) cache.emplace(o.cache_dir);

  BatchResult all;
  for (Task task : parse_tasks(o.task)) {
    auto r = run_batch(d, task, *backend, o.image_root, cache, cfg.max_in_flight);
    all.records.insert(all.records.end(), r.records.begin(), r.records.end());
    all.failures.insert(all.failures.end(), r.failures.begin(), r.failures.end());
    all.backend_calls += r.backend_calls;
    all.cache_hits += r.cache_hits;
  }
  std::stable_sort(all.records.begin(), all.records.end(),
                   [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  write_batch(all, o.out);
  out << "infer: " << all.records.size() << " predictions, " << all.failures.size()
      << " failures, " << all.cache_hits << " cache hits\n";
  return kExitOk;
}

inline int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto d = load_dataset(o.dataset);
  const auto preds = load_predictions(o.predictions);
  EvaluationSummary summary;
  if (!preds.empty()) summary.model_id = preds.front().model_id;

  std::vector<PredictionRecord> captions, vqa;
  for (const auto& p : preds) (p.task == Task::kCaption ? captions : vqa).push_back(p);

  std::vector<ScoreRecord> scores;
  if (!d.images_with(Task::kCaption).empty()) {
    scores = score_captions(captions, d, caption_info_table(d), o.jobs);
    summary.caption_images = d.images_with(Task::kCaption).size();
  }
  write_file(o.out, serialize_scores(scores));
  if (!vqa.empty() || (!d.images_with(Task::kVqa).empty() && captions.empty())) {
    summary.vqa = vqa_accuracy(vqa, d);
  }

  std::optional<RiskClassifier> classifier;
  if (!o.lm.empty()) {
    classifier = parse_classifier(read_file(o.lm));
  } else if (!o.lm_train.empty()) {
    classifier = train_risk_classifier(load_dataset(o.lm_train));
  }
  if (classifier && !o.lm_out.empty()) write_file(o.lm_out, serialize_classifier(*classifier));
  if (classifier && !captions.empty()) {
    summary.perplexity = perplexity_agreement(captions, d, *classifier);
  }
  summary.metric_means = metric_means(scores);
  if (!o.summary_out.empty()) write_file(o.summary_out, serialize_summary(summary));

  out << "evaluate: " << scores.size() << " scores over " << summary.caption_images
      << " caption images";
  if (summary.vqa) out << ", vqa accuracy " << format_percent(summary.vqa->accuracy_pct, 1);
  if (summary.perplexity) {
    out << ", perplexity agreement " << format_percent(summary.perplexity->agreement_pct, 1);
  }
  out << "\n";
  return kExitOk;
}

inline int cmd_compare(const Options& o, std::ostream& out) {
  auto rep = compare_runs(load_scores(o.finetuned), load_scores(o.general));
  rep.finetuned_label = o.finetuned_label;
  rep.general_label = o.general_label;
  for (const auto& path : {o.finetuned_summary, o.general_summary}) {
    if (!path.empty()) rep.identification.push_back(parse_summary_identification(read_file(path)));
  }
  write_file(o.out, render_report(rep, parse_format(o.format)));
  if (!o.json_out.empty()) write_file(o.json_out, serialize_report(rep));
  out << "compare: " << rep.metrics.size() << " metrics over " << rep.n << " images\n";
  return kExitOk;
}

inline int cmd_report(const Options& o, std::ostream& out) {
  const auto rep = parse_report(read_file(o.report));
  const auto text = render_report(rep, parse_format(o.format));
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
  return kExitOk;
}

inline int cmd_survey_plan(const Options& o, std::ostream& out) {
  const auto d = load_dataset(o.dataset);
  std::vector<ImageId> ids;
  for (const auto& img : d.images()) ids.push_back(img.id);
  const auto plan = plan_versions(ids, o.seed);
  write_file(o.out, serialize_plan(plan));
  out << "survey-plan: " << plan.versions.size() << " versions over " << ids.size()
      << " images\n";
  return kExitOk;
}

inline int cmd_survey_analyze(const Options& o, std::ostream& out) {
  const auto responses = load_responses(o.responses);
  const auto plan = parse_plan(read_file(o.plan));
  const auto resolved = resolve_choices(responses, plan);
  const auto summary = summarize(resolved);
  write_file(o.out, render_survey_summary(summary, parse_format(o.format)));
  if (!o.json_out.empty()) write_file(o.json_out, serialize_survey_summary(summary));
  out << "survey-analyze: " << summary.n_responses << " responses, fine-tuned choice rate "
      << format_percent(summary.fine_tuned_choice_rate, 1) << "\n";
  return kExitOk;
}

}  // namespace cli_detail

/// Parses `argv` and runs one subcommand. Diagnostics go to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  Options o;
  CLI::App app{"ergoeval: ergonomic risk captioning and VQA evaluation toolkit", "ergoeval"};
  app.require_subcommand(1);
  const auto formats = CLI::IsMember({"text", "tsv"});
  const auto positive = CLI::PositiveNumber;

  auto* validate = app.add_subcommand("validate", "Check a dataset file and print its counts");
  validate->add_option("--dataset", o.dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);

  auto* split = app.add_subcommand("split", "Seeded image-level fine-tune/test split");
  split->add_option("--dataset", o.dataset, "Unsplit dataset JSON")->required()->check(CLI::ExistingFile);
  auto* count = split->add_option("--test-count", o.test_count, "Number of test images");
  auto* seed = split->add_option("--seed", o.seed, "Shuffle seed");
  auto* ids = split->add_option("--test-ids", o.test_ids, "File listing test image ids")
                  ->check(CLI::ExistingFile);
  count->needs(seed);
  seed->needs(count);
  ids->excludes(count)->excludes(seed);
  split->add_option("--finetune-out", o.finetune_out, "Fine-tune partition output")->required();
  split->add_option("--test-out", o.test_out, "Test partition output")->required();

  auto* infer = app.add_subcommand("infer", "Query a model for every annotated image");
  infer->add_option("--dataset", o.dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
  infer->add_option("--task", o.task, "caption, vqa or all")
      ->check(CLI::IsMember({"caption", "vqa", "all"}));
  infer->add_option("--backend", o.backend, "stub or remote")->check(CLI::IsMember({"stub", "remote"}));
  infer->add_option("--endpoint", o.endpoint, "Remote inference URL");
  infer->add_option("--model-id", o.model_id, "Model label written into predictions");
  infer->add_option("--auth-env", o.auth_env, "Environment variable holding the bearer token");
  infer->add_option("--timeout", o.timeout, "Per-request timeout in seconds")->check(positive);
  infer->add_option("--retries", o.retries, "Retries on transient failures")
      ->check(CLI::NonNegativeNumber);
  infer->add_option("--cache-dir", o.cache_dir, "Response cache directory");
  infer->add_option("--image-root", o.image_root, "Directory holding the image files");
  infer->add_option("--out", o.out, "Prediction JSON-lines output")->required();
  infer->add_option("--jobs", o.jobs, "Maximum requests in flight")->check(positive);

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a dataset");
  evaluate->add_option("--dataset", o.dataset, "Test partition JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--predictions", o.predictions, "Prediction JSON-lines file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out,--scores", o.out, "Score JSON-lines output")->required();
  evaluate->add_option("--summary-out", o.summary_out, "Evaluation summary JSON output");
  auto* lm_train = evaluate->add_option("--lm-train", o.lm_train,
                                        "Dataset whose captions train the risk language models")
                       ->check(CLI::ExistingFile);
  evaluate->add_option("--lm", o.lm, "Saved risk classifier JSON")
      ->check(CLI::ExistingFile)
      ->excludes(lm_train);
  evaluate->add_option("--lm-out", o.lm_out, "Write the risk classifier used");
  evaluate->add_option("--jobs", o.jobs, "Scoring worker threads")->check(positive);

  auto* compare = app.add_subcommand("compare", "Compare a fine-tuned run with a general run");
  compare->add_option("--finetuned", o.finetuned, "Fine-tuned score file")->required()->check(CLI::ExistingFile);
  compare->add_option("--general", o.general, "General score file")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", o.out, "Rendered report output")->required();
  compare->add_option("--json-out", o.json_out, "Report JSON output");
  compare->add_option("--format", o.format, "text or tsv")->check(formats);
  compare->add_option("--finetuned-summary", o.finetuned_summary, "Fine-tuned evaluation summary")
      ->check(CLI::ExistingFile);
  compare->add_option("--general-summary", o.general_summary, "General evaluation summary")
      ->check(CLI::ExistingFile);
  compare->add_option("--finetuned-label", o.finetuned_label, "Column label for the fine-tuned run");
  compare->add_option("--general-label", o.general_label, "Column label for the general run");

  auto* report = app.add_subcommand("report", "Render a saved comparison report");
  report->add_option("--report", o.report, "Report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--format", o.format, "text or tsv")->check(formats);
  report->add_option("--out", o.out, "Output file (default: standard output)");

  auto* survey_plan = app.add_subcommand("survey-plan", "Randomize survey versions");
  survey_plan->add_option("--dataset", o.dataset, "Test partition JSON")->required()->check(CLI::ExistingFile);
  survey_plan->add_option("--seed", o.seed, "Randomization seed")->required();
  survey_plan->add_option("--out", o.out, "Plan JSON output")->required();

  auto* survey_analyze = app.add_subcommand("survey-analyze", "Summarize survey responses");
  survey_analyze->add_option("--responses", o.responses, "Response CSV")->required()->check(CLI::ExistingFile);
  survey_analyze->add_option("--plan", o.plan, "Plan JSON")->required()->check(CLI::ExistingFile);
  survey_analyze->add_option("--out", o.out, "Rendered summary output")->required();
  survey_analyze->add_option("--json-out", o.json_out, "Summary JSON output");
  survey_analyze->add_option("--format", o.format, "text or tsv")->check(formats);

  try {
    app.parse(argc, argv);
    if (*split && o.test_ids.empty() && count->count() == 0) {
      throw CLI::RequiredError("--test-count and --seed, or --test-ids,");
    }
    if (*infer && o.backend == "remote" && o.endpoint.empty()) {
      throw CLI::RequiredError("--endpoint (remote backend)");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*split) return cmd_split(o, out);
    if (*infer) return cmd_infer(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*report) return cmd_report(o, out);
    if (*survey_plan) return cmd_survey_plan(o, out);
    if (*survey_analyze) return cmd_survey_analyze(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.record_id()) err << " (record " << *e.record_id() << ")";
    err << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace ergoeval
