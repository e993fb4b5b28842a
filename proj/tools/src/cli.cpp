#include "textpix_cli/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "textpix/checkpoint.hpp"
#include "textpix/dataset.hpp"
#include "textpix/error.hpp"
#include "textpix/evaluation.hpp"
#include "textpix/grad_check.hpp"
#include "textpix/pgm.hpp"
#include "textpix/rng.hpp"
#include "textpix/sampler.hpp"
#include "textpix/ssim.hpp"
#include "textpix/trainer.hpp"
#include "textpix_cli/settings.hpp"

namespace fs = std::filesystem;

namespace textpix::cli {

namespace {

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw FormatError("cannot write " + path.string());
  o << text;
  if (!o) throw FormatError("failed writing " + path.string());
}

// One writer per output directory.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".textpix.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw FormatError("cannot create lock file " + path_.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw FormatError("another textpix process is writing to " + dir.string());
    }
  }
  ~DirectoryLock() {
    if (fd_ < 0) return;
    std::error_code ec;
    fs::remove(path_, ec);
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

struct Context {
  RunConfig cfg;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

std::string sample_name(std::size_t k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample-%03zu", k);
  return buf + std::string(ext);
}

// ---- gen-data -------------------------------------------------------------------------

int cmd_gen_data(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  GenConfig g;
  g.canvas = c.size("canvas");
  std::tie(g.glyph_width, g.glyph_height) = c.extent("glyph");
  g.layout = layout_mode_from_string(c.text("layout"));
  g.single_fraction = c.real("single-fraction");
  g.train_count = c.size("count");
  g.test_count = c.size("test-count");
  g.levels = c.size("levels");
  g.seed = c.u64("seed");
  g.idx_images = c.text("idx-images");
  g.idx_labels = c.text("idx-labels");
  g.validate();

  const auto examples = gen_mnist_captions(g);
  std::vector<std::string> corpus;
  for (const auto& e : examples) corpus.push_back(e.caption);
  const Vocabulary vocab = build_vocab(corpus);

  fs::create_directories(ctx.out_dir / "images");
  std::vector<ManifestEntry> entries;
  std::size_t counter[2] = {0, 0};
  for (const auto& e : examples) {
    const std::size_t idx = counter[e.split == Split::test]++;
    char name[64];
    std::snprintf(name, sizeof name, "images/%s-%04zu.pgm", std::string(to_string(e.split)).c_str(), idx);
    write_pgm(e.image, ctx.out_dir / name);
    entries.push_back({name, e.split, e.caption});
  }
  write_manifest(entries, ctx.out_dir / "manifest.tsv");
  save_vocab(vocab, (ctx.out_dir / "vocab.txt").string());
  ctx.out << "wrote " << counter[0] << " train + " << counter[1] << " test examples (" << g.canvas << "x"
          << g.canvas << ", " << g.levels << " levels, " << vocab.word_count() << " words) to "
          << ctx.out_dir.string() << "\n";
  return kOk;
}

// ---- train ----------------------------------------------------------------------------

std::string history_line(const EpochRecord& r) {
  return std::to_string(r.epoch) + "\t" + shortest(r.train_nll) + "\t" + shortest(r.eval_nll) + "\n";
}

int cmd_train(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  if (!c.has("data")) throw ValueError("train needs --data <dir written by gen-data>");
  const Corpus corpus = load_corpus(c.text("data"));
  std::vector<TrainingPair> train_set = split_pairs(corpus, Split::train, corpus.vocab);
  const std::vector<TrainingPair> eval_set = split_pairs(corpus, Split::test, corpus.vocab);
  if (train_set.empty()) throw FormatError("corpus has no training examples");
  if (c.flag("overfit-one")) train_set.resize(1);
  if (c.flag("shuffle-captions")) {
    Rng rng(derive_seed(c.u64("seed"), "caption"));
    for (std::size_t i = train_set.size(); i > 1; --i)
      std::swap(train_set[i - 1].caption, train_set[rng.below(i)].caption);
  }

  TrainConfig tc;
  tc.learning_rate = c.real("lr");
  tc.clip_norm = c.real("clip");
  tc.batch_size = c.size("batch");
  tc.epochs = c.size("epochs");
  tc.seed = c.u64("seed");
  tc.rms_decay = c.real("rms-decay");
  tc.rms_epsilon = c.real("rms-epsilon");
  tc.level_weights = c.reals("level-weights");
  tc.threads = c.size("threads");
  tc.checkpoint_every = c.size("checkpoint-every");
  const ImageGrid& first = train_set.front().image;
  tc.dims.vocab_size = corpus.vocab.size();
  tc.dims.embed_dim = c.size("embed");
  tc.dims.encoder_width = c.size("encoder-width");
  tc.dims.decoder_width = c.size("decoder-width");
  tc.dims.align_width = c.size("align-width");
  tc.dims.decoder_layers = c.size("layers");
  tc.dims.attention = attention_kind_from_string(c.text("attention"));
  tc.dims.levels = first.levels();
  tc.dims.height = first.height();
  tc.dims.width = first.width();
  tc.validate();

  const fs::path history_path = ctx.out_dir / "history.tsv";
  write_text(history_path, "");
  std::ofstream history(history_path, std::ios::binary | std::ios::app);
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    history << history_line(r);
    history.flush();
    ctx.out << "epoch " << r.epoch << " train_nll " << shortest(r.train_nll) << " eval_nll " << shortest(r.eval_nll)
            << "\n";
    ctx.out.flush();
  };
  hooks.on_checkpoint = [&](const Checkpoint& ck) {
    const std::size_t steps_per_epoch = (train_set.size() + tc.batch_size - 1) / tc.batch_size;
    save_checkpoint(ck, (ctx.out_dir / ("checkpoint-epoch" + std::to_string(ck.step / steps_per_epoch) + ".bin")).string());
  };

  ctx.out << "training on " << train_set.size() << " examples, " << eval_set.size() << " held out\n";
  const TrainResult result = train(tc, corpus.vocab, train_set, eval_set, hooks);
  save_checkpoint(result.checkpoint, (ctx.out_dir / "checkpoint.bin").string());
  if (result.aborted) {
    ctx.err << "error: training aborted: " << result.abort_reason << " (last good checkpoint saved)\n";
    return kNumerical;
  }
  ctx.out << "saved " << (ctx.out_dir / "checkpoint.bin").string() << "\n";
  return kOk;
}

// ---- sample ---------------------------------------------------------------------------

// N x L grid: line i holds the weight of caption word i at every pixel, in raster order.
std::string attention_grid(const AttentionTrace& trace, const Caption& caption, const Vocabulary& vocab) {
  std::string out = "# rows:";
  for (TokenId id : caption.ids) out += " " + vocab.token(id);
  out += "\n";
  char buf[32];
  for (std::size_t i = 0; i < caption.length(); ++i) {
    for (std::size_t j = 0; j < trace.rows.size(); ++j) {
      std::snprintf(buf, sizeof buf, j ? " %.6f" : "%.6f", trace.rows[j][i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

int cmd_sample(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  if (!c.has("checkpoint")) throw ValueError("sample needs --checkpoint <file>");
  if (!c.has("caption")) throw ValueError("sample needs --caption <text>");
  const Checkpoint ck = load_checkpoint(c.text("checkpoint"));
  const Caption caption = tokenize(c.text("caption"), ck.vocab);
  if (std::all_of(caption.ids.begin(), caption.ids.end(), [](TokenId t) { return t == Vocabulary::kUnk; })) {
    ctx.err << "warning: no caption word is in the model vocabulary; sampling from unknown-word tokens\n";
  }
  const std::string mode = c.text("mode");
  const std::size_t count = c.size("count");
  if (count == 0) throw ValueError("--count must be at least 1");
  if (mode != "stochastic" && count != 1) throw ValueError("--count > 1 needs --mode stochastic");
  const bool maps = c.flag("attention-maps");
  const std::uint64_t sampling = derive_seed(c.u64("seed"), "sampling");

  for (std::size_t k = 0; k < count; ++k) {
    AttentionTrace trace;
    AttentionTrace* t = maps ? &trace : nullptr;
    ImageGrid image;
    if (mode == "greedy") {
      image = sample_greedy(caption, ck.params, t);
    } else if (mode == "beam") {
      image = sample_beam(caption, ck.params, c.size("beam-width"), t);
    } else if (mode == "stochastic") {
      image = sample_stochastic(caption, ck.params, derive_seed(sampling, static_cast<std::uint64_t>(k)), t);
    } else {
      throw ValueError("unknown --mode '" + mode + "' (expected greedy, beam or stochastic)");
    }
    write_pgm(image, ctx.out_dir / sample_name(k, ".pgm"));
    if (maps) {
      write_text(ctx.out_dir / sample_name(k, ".attention.txt"),
                 attention_grid(trace, caption, ck.vocab));
    }
  }
  ctx.out << "wrote " << count << " " << mode << " sample" << (count == 1 ? "" : "s") << " to "
          << ctx.out_dir.string() << "\n";
  return kOk;
}

// ---- eval -----------------------------------------------------------------------------

int cmd_eval(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  if (!c.has("checkpoint")) throw ValueError("eval needs --checkpoint <file>");
  if (!c.has("data")) throw ValueError("eval needs --data <dir written by gen-data>");
  const Checkpoint ck = load_checkpoint(c.text("checkpoint"));
  const Corpus corpus = load_corpus(c.text("data"));
  const auto pairs = split_pairs(corpus, split_from_string(c.text("split")), ck.vocab);
  std::vector<Caption> captions;
  std::vector<ImageGrid> images;
  for (const auto& p : pairs) {
    check_image_for_model(p.image, ck.params.dims);
    captions.push_back(p.caption);
    images.push_back(p.image);
  }
  const auto ks = c.sizes("ks");
  if (ks.empty()) throw ValueError("--ks needs at least one cut-off");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  if (images.size() < max_k) {
    throw ValueError("ranking pool has " + std::to_string(images.size()) + " images, fewer than R@" +
                     std::to_string(max_k) + " needs");
  }
  const RankingReport ranking = recall_at_k(captions, images, ck.params, ks);

  SsimParams sp = SsimParams::for_levels(ck.params.dims.levels);
  sp.window = c.size("ssim-window");
  const SsiStats ssi = mean_ssi(captions, images, ck.params, c.size("samples-per-caption"),
                                derive_seed(c.u64("seed"), "sampling"), sp);

  const std::string table = format_metrics_table(c.text("model-name"), ranking, ssi);
  write_text(ctx.out_dir / "metrics.txt", table);
  std::string ranks = "caption\trank\tssi\n";
  for (std::size_t i = 0; i < ranking.ranks.size(); ++i)
    ranks += std::to_string(i) + "\t" + std::to_string(ranking.ranks[i]) + "\t" + shortest(ssi.per_caption_mean[i]) + "\n";
  write_text(ctx.out_dir / "ranks.tsv", ranks);
  ctx.out << table;
  return kOk;
}

// ---- grad-check -----------------------------------------------------------------------

int cmd_grad_check(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  ModelDims d;
  d.vocab_size = Vocabulary::kFirstWord + 2;
  d.embed_dim = 3;
  d.encoder_width = 2;
  d.decoder_width = 4;
  d.align_width = 3;
  d.levels = 2;
  d.height = 2;
  d.width = 2;
  d.attention = attention_kind_from_string(c.text("attention"));
  const std::uint64_t seed = c.u64("seed");
  ModelParams model = zero_model(d);
  Rng rng(derive_seed(seed, "init"));
  const double scale = c.real("scale");
  for (std::size_t i = 0; i < model.tensors.size(); ++i)
    for (double& v : model.tensors[i].data()) v = rng.uniform(-scale, scale);
  Rng pixels(derive_seed(seed, "data"));
  std::vector<Level> px(4);
  for (auto& p : px) p = static_cast<Level>(pixels.below(2));
  const TrainingPair pair{ImageGrid(2, 2, 2, px), Caption{{Vocabulary::kFirstWord, Vocabulary::kFirstWord + 1}}};

  const GradCheckResult r = grad_check(
      [&](Tape&, const std::vector<Var>& vars) {
        const BoundModel bound{&model, vars};
        return nll_loss(std::span<const TrainingPair>(&pair, 1), bound);
      },
      model.tensors, c.real("eps"));
  const double tol = c.real("tolerance");
  const bool ok = r.max_relative_error < tol;
  const std::string report = describe(r, model.tensors) + "\n" + (ok ? "PASS" : "FAIL") + " (tolerance " +
                             shortest(tol) + ")\n";
  write_text(ctx.out_dir / "grad-check.txt", report);
  ctx.out << report;
  return ok ? kOk : kNumerical;
}

int dispatch(Context& ctx) {
  switch (ctx.cfg.command()) {
    case Command::gen_data: return cmd_gen_data(ctx);
    case Command::train: return cmd_train(ctx);
    case Command::sample: return cmd_sample(ctx);
    case Command::eval: return cmd_eval(ctx);
    case Command::grad_check: return cmd_grad_check(ctx);
  }
  return kUsage;
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
  Corpus c;
  c.vocab = load_vocab((dir / "vocab.txt").string());
  c.entries = read_manifest(dir / "manifest.tsv");
  for (const auto& e : c.entries) c.images.push_back(read_pgm(dir / e.image_file));
  for (const auto& img : c.images) {
    if (!img.same_shape(c.images.front())) throw FormatError("corpus images differ in size or levels");
  }
  return c;
}

std::vector<TrainingPair> split_pairs(const Corpus& corpus, Split split, const Vocabulary& vocab) {
  std::vector<TrainingPair> out;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (corpus.entries[i].split != split) continue;
    out.push_back({corpus.images[i], tokenize(corpus.entries[i].caption, vocab)});
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"textpix: caption-conditioned autoregressive pixel generator"};
  app.name("textpix");
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "textpix-out";
  std::map<std::string, std::string> given;
  app.add_option("--config", config_path, "`key = value` settings file");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  struct Sub {
    Command command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
  };
  const char* descriptions[] = {"generate the captioned digit corpus", "fit a model to a corpus",
                                "generate images from a caption", "ranking and similarity metrics",
                                "check analytic gradients against finite differences"};
  std::vector<Sub> subs;
  subs.reserve(5);
  for (Command cmd : {Command::gen_data, Command::train, Command::sample, Command::eval, Command::grad_check}) {
    subs.push_back({cmd, app.add_subcommand(std::string(command_name(cmd)), descriptions[static_cast<int>(cmd)]), {}, {}});
  }
  for (auto& s : subs) {
    for (const auto& spec : setting_specs()) {
      if (!applies(spec, s.command)) continue;
      if (spec.kind == Kind::boolean) {
        s.app->add_flag("--" + spec.key, s.flags[spec.key], spec.help);
      } else {
        s.app->add_option("--" + spec.key, s.values[spec.key], spec.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    const Sub* chosen = nullptr;
    for (const auto& s : subs)
      if (s.app->parsed()) chosen = &s;
    if (chosen == nullptr) throw ValueError("no command given");
    for (const auto& [key, value] : chosen->values)
      if (chosen->app->count("--" + key) > 0) given[key] = value;
    for (const auto& [key, value] : chosen->flags)
      if (chosen->app->count("--" + key) > 0) given[key] = value ? "true" : "false";

    std::map<std::string, std::string> file;
    if (!config_path.empty()) file = parse_config_text(read_text(config_path));
    Context ctx{resolve(chosen->command, file, given), out_dir, out, err};
    fs::create_directories(ctx.out_dir);
    const DirectoryLock lock(ctx.out_dir);
    write_text(ctx.out_dir / (std::string(command_name(chosen->command)) + ".conf"), ctx.cfg.to_text());
    return dispatch(ctx);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValueError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace textpix::cli
