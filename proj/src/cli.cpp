#include "charembed/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

#include "charembed/augment.hpp"
#include "charembed/autoencoder.hpp"
#include "charembed/checkpoint.hpp"
#include "charembed/errors.hpp"
#include "charembed/eval.hpp"
#include "charembed/trainer.hpp"

namespace charembed {
namespace {

namespace fs = std::filesystem;

// Flags every subcommand accepts.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> scale_factor;
  std::string config;
};

void add_common(CLI::App* sub, CommonFlags& common) {
  sub->add_option("--seed", common.seed, "Seed for the run's single random generator (generated when omitted)");
  sub->add_option("--scale-factor", common.scale_factor,
                  "Divide every filter count and hidden size by this factor (train); "
                  "checked against the checkpoint elsewhere")
      ->check(CLI::PositiveNumber);
  sub->add_option("--config", common.config, "key=value file of flag values (keys are long flag names)");
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Appends `--key value` for every entry of the subcommand's --config file
// whose flag is not already on the command line. Throws IoError or
// ConfigError on an unreadable file, a malformed line or an unknown key.
std::vector<std::string> expand_config(std::vector<std::string> args, const CLI::App& app) {
  if (args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    std::string key = trim(std::string_view(text).substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (key == "config" || key == "help" || opt == nullptr) {
      throw ConfigError(where + ": unknown key '" + key + "' for " + sub->get_name());
    }
    if (given_on_command_line(args, flag)) continue;
    if (opt->get_type_size() == 0) {
      if (value == "1" || value == "true" || value == "yes" || value == "on") extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::uint64_t resolve_seed(const CommonFlags& common, std::ostream& err) {
  std::uint64_t seed = 0;
  if (common.seed) {
    seed = *common.seed;
  } else {
    std::random_device device;
    seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  err << "seed " << seed << '\n';
  return seed;
}

void require_readable(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + what + " '" + path + "'");
}

void require_writable_target(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory '" + parent.string() + "' does not exist");
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read input '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write output '" + path + "'");
  return out;
}

Autoencoder load_model(const std::string& path, const CommonFlags& common) {
  Autoencoder model = Autoencoder::from_checkpoint(load_checkpoint(path));
  if (common.scale_factor && !(ModelConfig::scaled(*common.scale_factor) == model.config())) {
    throw ConfigError("--scale-factor " + std::to_string(*common.scale_factor) + " does not match checkpoint '" +
                      path + "'");
  }
  return model;
}

struct TrainFlags {
  std::string corpus, lexicon, out, log, resume;
  std::optional<std::size_t> epochs, checkpoint_every;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3, dropout = 0.5, clip_norm = 5.0;
  double count_param = 0.5, synonym_param = 0.5;
  bool zero_output_projection = false;
};

int cmd_train(const TrainFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
  require_readable(f.corpus, "corpus");
  if (!f.lexicon.empty()) require_readable(f.lexicon, "lexicon");
  if (!f.resume.empty()) require_readable(f.resume, "checkpoint");
  require_writable_target(f.out);
  const std::string log_path = f.log.empty() ? f.out + ".log" : f.log;
  std::ofstream log(log_path, f.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("cannot write training log '" + log_path + "'");

  std::vector<std::string> corpus = load_corpus(f.corpus);
  SynonymLexicon lexicon = f.lexicon.empty() ? SynonymLexicon() : SynonymLexicon::load(f.lexicon);

  std::optional<Trainer> trainer;
  if (!f.resume.empty()) {
    const Checkpoint ck = load_checkpoint(f.resume);
    TrainOptions options = TrainOptions::from_key_values(ck.config);
    if (f.epochs) options.epochs = *f.epochs;
    if (f.checkpoint_every) options.checkpoint_every = *f.checkpoint_every;
    options.checkpoint_path = f.out;
    err << "seed " << options.seed << " (resumed from " << f.resume << ")\n";
    log << "# resume " << f.resume << " seed " << options.seed << '\n';
    trainer.emplace(Trainer::resume(ck, std::move(corpus), std::move(lexicon), options));
  } else {
    TrainOptions options;
    options.seed = resolve_seed(common, err);
    options.epochs = f.epochs.value_or(10);
    options.batch_size = f.batch_size;
    options.adam.learning_rate = f.learning_rate;
    options.dropout = f.dropout;
    options.clip_norm = f.clip_norm;
    options.augmentation = AugmentationConfig{f.count_param, f.synonym_param, options.seed};
    options.init.zero_output_projection = f.zero_output_projection;
    options.checkpoint_every = f.checkpoint_every.value_or(0);
    options.checkpoint_path = f.out;
    log << "# seed " << options.seed << " scale_factor " << common.scale_factor.value_or(1) << '\n';
    trainer.emplace(ModelConfig::scaled(common.scale_factor.value_or(1)), options, std::move(corpus),
                    std::move(lexicon));
  }
  trainer->run(&log);
  const auto& history = trainer->loss_history();
  out << "trained " << trainer->epoch() << " epochs, " << trainer->step() << " steps";
  if (!history.empty()) out << ", final loss " << history.back();
  out << "; checkpoint " << f.out << '\n';
  return kExitOk;
}

int cmd_embed(const std::string& checkpoint, const std::string& input, const std::string& output,
              const CommonFlags& common) {
  require_readable(checkpoint, "checkpoint");
  require_writable_target(output);
  const Autoencoder model = load_model(checkpoint, common);
  const std::vector<std::string> lines = read_lines(input);
  std::ofstream out = open_output(output);
  char buf[32];
  for (const std::string& line : lines) {
    const TweetEmbedding e = model.embed(line);
    for (std::size_t i = 0; i < e.dim(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", e[i]);
      if (i) out << '\t';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + output + "'");
  return kExitOk;
}

int cmd_reconstruct(const std::string& checkpoint, const std::string& input, const std::string& output,
                    const CommonFlags& common) {
  require_readable(checkpoint, "checkpoint");
  require_writable_target(output);
  const Autoencoder model = load_model(checkpoint, common);
  const std::vector<std::string> lines = read_lines(input);
  std::ofstream out = open_output(output);
  for (const std::string& line : lines) out << model.reconstruct(line) << '\n';
  if (!out) throw IoError("failed writing '" + output + "'");
  return kExitOk;
}

struct AugmentFlags {
  std::string corpus, lexicon, out;
  std::size_t samples = 10;
  double count_param = 0.5, synonym_param = 0.5;
};

int cmd_augment(const AugmentFlags& f, const CommonFlags& common, std::ostream& err) {
  require_readable(f.corpus, "corpus");
  require_readable(f.lexicon, "lexicon");
  require_writable_target(f.out);
  const std::vector<std::string> corpus = load_corpus(f.corpus);
  const SynonymLexicon lexicon = SynonymLexicon::load(f.lexicon);
  const std::uint64_t seed = resolve_seed(common, err);
  const AugmentationConfig config{f.count_param, f.synonym_param, seed};
  config.validate();
  Rng rng(seed);
  std::ofstream out = open_output(f.out);
  for (std::size_t i = 0; i < f.samples; ++i) {
    const AugmentedPair pair = augment(corpus[i % corpus.size()], lexicon, config, rng);
    out << pair.input << '\t' << pair.target << '\n';
  }
  if (!out) throw IoError("failed writing '" + f.out + "'");
  return kExitOk;
}

struct EvalFlags {
  std::string checkpoint, task, train, test, report;
  std::size_t folds = 5;
};

int cmd_eval(const EvalFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
  require_readable(f.checkpoint, "checkpoint");
  require_readable(f.train, "training set");
  require_readable(f.test, "test set");
  if (!f.report.empty()) require_writable_target(f.report);
  const Autoencoder model = load_model(f.checkpoint, common);
  EvalOptions options;
  options.folds = f.folds;
  options.seed = resolve_seed(common, err);
  const Embedder embed = [&model](std::string_view text) { return model.embed(text); };

  std::map<std::string, std::string> kv;
  if (f.task == "paraphrase") {
    const ParaphraseReport r =
        eval_paraphrase(load_paraphrase_tsv(f.train), load_paraphrase_tsv(f.test), embed, options, &err);
    out << format_report(r.scores) << '\n';
    kv = report_key_values(r);
  } else {
    const SentimentReport r = eval_sentiment(load_sentiment_tsv(f.train), load_sentiment_tsv(f.test), embed, options);
    const PrfScores averaged{0.5 * (r.positive.precision + r.negative.precision),
                             0.5 * (r.positive.recall + r.negative.recall), r.averaged_f1};
    out << format_report(averaged) << '\n';
    kv = report_key_values(r);
  }
  kv["seed"] = std::to_string(options.seed);
  if (!f.report.empty()) write_key_values(f.report, kv);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Character-level CNN-LSTM tweet embeddings"};
  app.name(args.empty() ? "charembed" : args.front());
  app.require_subcommand(1);

  CommonFlags common;
  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train the encoder-decoder on a one-tweet-per-line corpus");
  add_common(train_cmd, common);
  train_cmd->add_option("--corpus", train.corpus, "UTF-8 corpus, one tweet per line")->required();
  train_cmd->add_option("--lexicon", train.lexicon, "Synonym lexicon TSV (no augmentation when omitted)");
  train_cmd->add_option("--out", train.out, "Checkpoint to write")->required();
  train_cmd->add_option("--log", train.log, "Training log (default: <out>.log)");
  train_cmd->add_option("--resume", train.resume, "Continue from this checkpoint");
  train_cmd->add_option("--epochs", train.epochs, "Epochs to run in total (default 10)");
  train_cmd->add_option("--batch-size", train.batch_size, "Pairs per Adam step")->capture_default_str();
  train_cmd->add_option("--learning-rate", train.learning_rate, "Adam step size")->capture_default_str();
  train_cmd->add_option("--dropout", train.dropout, "Dropout rate on the embedding")->capture_default_str();
  train_cmd->add_option("--clip-norm", train.clip_norm, "Global gradient-norm cap, 0 disables")
      ->capture_default_str();
  train_cmd->add_option("--count-param", train.count_param, "Geometric parameter for replacement count")
      ->capture_default_str();
  train_cmd->add_option("--synonym-param", train.synonym_param, "Geometric parameter for synonym index")
      ->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train.checkpoint_every, "Also checkpoint every N epochs");
  train_cmd->add_flag("--zero-output-projection", train.zero_output_projection,
                      "Start the output projection at zero (uniform first predictions)");

  std::string embed_ckpt, embed_in, embed_out;
  auto* embed_cmd = app.add_subcommand("embed", "Write one tab-separated embedding per input line");
  add_common(embed_cmd, common);
  embed_cmd->add_option("--checkpoint", embed_ckpt, "Trained checkpoint")->required();
  embed_cmd->add_option("--input", embed_in, "Texts, one per line")->required();
  embed_cmd->add_option("--out", embed_out, "Output TSV")->required();

  std::string rec_ckpt, rec_in, rec_out;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Greedy-decode each input line through the autoencoder");
  add_common(rec_cmd, common);
  rec_cmd->add_option("--checkpoint", rec_ckpt, "Trained checkpoint")->required();
  rec_cmd->add_option("--input", rec_in, "Texts, one per line")->required();
  rec_cmd->add_option("--out", rec_out, "Output text, one line per input")->required();

  AugmentFlags aug;
  auto* aug_cmd = app.add_subcommand("augment", "Emit input<TAB>augmented pairs for inspection");
  add_common(aug_cmd, common);
  aug_cmd->add_option("--corpus", aug.corpus, "UTF-8 corpus, one tweet per line")->required();
  aug_cmd->add_option("--lexicon", aug.lexicon, "Synonym lexicon TSV")->required();
  aug_cmd->add_option("--samples", aug.samples, "Number of pairs (cycles through the corpus)")
      ->capture_default_str();
  aug_cmd->add_option("--out", aug.out, "Output TSV")->required();
  aug_cmd->add_option("--count-param", aug.count_param, "Geometric parameter for replacement count")
      ->capture_default_str();
  aug_cmd->add_option("--synonym-param", aug.synonym_param, "Geometric parameter for synonym index")
      ->capture_default_str();

  EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "Logistic-regression evaluation on frozen embeddings");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint")->required();
  eval_cmd->add_option("--task", ev.task, "paraphrase or sentiment")
      ->required()
      ->check(CLI::IsMember({"paraphrase", "sentiment"}));
  eval_cmd->add_option("--train", ev.train, "Training TSV")->required();
  eval_cmd->add_option("--test", ev.test, "Test TSV")->required();
  eval_cmd->add_option("--report", ev.report, "Also write key=value results here");
  eval_cmd->add_option("--folds", ev.folds, "Cross-validation folds")->capture_default_str()->check(
      CLI::Range(2, 1000));

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args, app);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::vector<std::string> rest(expanded.rbegin(), expanded.rend() - (expanded.empty() ? 0 : 1));
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, common, out, err);
    if (*embed_cmd) return cmd_embed(embed_ckpt, embed_in, embed_out, common);
    if (*rec_cmd) return cmd_reconstruct(rec_ckpt, rec_in, rec_out, common);
    if (*aug_cmd) return cmd_augment(aug, common, err);
    if (*eval_cmd) return cmd_eval(ev, common, out, err);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace charembed
