// Command-line front end: tokenize, boundary, metrics, embed, truncate,
// bench, visualize. CSV goes to stdout, human summaries to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epoc/epoc.hpp"

namespace {

using namespace epoc;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct MethodFlags {
  std::string method;
  int p = PatchConfig{}.p;
  int k = SlicConfig{}.k;
  double compactness = SlicConfig{}.compactness;
  int iters = SlicConfig{}.iterations;
  std::optional<double> t;
  int radius = TokenizerSpec{}.boundary_radius;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--p", p, "patch: patches per side")->capture_default_str();
    cmd.add_option("--k", k, "slic: target number of superpixels")->capture_default_str();
    cmd.add_option("--compactness", compactness, "slic: compactness m")->capture_default_str();
    cmd.add_option("--iters", iters, "slic: k-means iterations")->capture_default_str();
    cmd.add_option("--t", t, "epoc: seed threshold in (0,1)");
    cmd.add_option("--radius", radius, "epoc on images: blur radius of the gradient boundary map")
        ->capture_default_str();
  }

  TokenizerSpec spec(double default_t) const {
    TokenizerSpec s;
    s.method = parse_method(method);
    s.patch.p = p;
    s.slic.k = k;
    s.slic.compactness = compactness;
    s.slic.iterations = iters;
    s.watershed.threshold = t.value_or(default_t);
    s.boundary_radius = radius;
    s.validate();
    return s;
  }
};

// Boundary maps come either as FMAP or as a grayscale PNG scaled to [0,1].
FloatMap read_boundary(const std::string& path) {
  return has_png_extension(path) ? read_png_float(path) : read_fmap(path);
}

// Ground truth is either a SEG (converted to boundaries) or a PNG mask where
// any nonzero sample marks a boundary pixel.
BinaryMask read_gt_boundary(const std::string& path) {
  if (!has_png_extension(path)) return boundaries_from_labels(read_seg(path));
  const auto img = read_png(path);
  BinaryMask mask(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        if (img(y, x, c)) mask.set(y, x);
  return mask;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.precision(std::cout.precision());
  return file;
}

void report_written(const std::string& path, std::ostream& out) {
  if (!out) throw IoError("write failed for " + (path.empty() ? std::string("stdout") : path));
}

// tokenize ----------------------------------------------------------------

struct TokenizeArgs {
  MethodFlags flags;
  std::string input, boundary, out;
};

int run_tokenize(const TokenizeArgs& a) {
  if (a.flags.method == "epoc" && !a.flags.t) throw ValidationError("tokenize: --t is required for --method epoc");
  const auto spec = a.flags.spec(WatershedConfig{}.threshold);
  std::optional<TokenIndexMap> seg;
  if (spec.method == Method::epoc && !a.boundary.empty()) {
    seg = epoc_segment(read_boundary(a.boundary), spec.watershed);
  } else if (spec.method == Method::patch && a.input.empty() && !a.boundary.empty()) {
    const auto map = read_boundary(a.boundary);
    seg = patch_segment(map.height(), map.width(), spec.patch);
  } else {
    if (a.input.empty()) throw ValidationError("tokenize: --input is required for this method");
    seg = tokenize_image(spec, read_png(a.input));
  }
  write_seg(a.out, *seg);
  std::cout << "method,height,width,tokens\n"
            << to_string(spec.method) << ',' << seg->height() << ',' << seg->width() << ',' << seg->n_tokens() << '\n';
  std::cerr << "tokenize: " << seg->n_tokens() << " tokens (" << to_string(spec.method) << ") -> " << a.out << '\n';
  return 0;
}

// boundary ----------------------------------------------------------------

struct BoundaryArgs {
  std::string input, out;
  int radius = 2;
};

int run_boundary(const BoundaryArgs& a) {
  if (a.radius < 0) throw ValidationError("boundary: --radius must be >= 0");
  const auto map = gradient_boundary(read_png(a.input), a.radius);
  write_fmap(a.out, map);
  std::cerr << "boundary: " << map.height() << 'x' << map.width() << " map -> " << a.out << '\n';
  return 0;
}

// metrics -----------------------------------------------------------------

struct MetricsArgs {
  std::string kind, pred, gt;
  PrConfig pr;
  MonoConfig mono;
  bool keep_border = false;
};

int run_metrics(MetricsArgs a) {
  const auto pred = read_seg(a.pred);
  if (a.kind == "sizes") {
    const auto dist = size_distribution(pred);
    std::cout << "rank,fraction\n";
    for (std::size_t i = 0; i < dist.size(); ++i) std::cout << i << ',' << dist[i] << '\n';
    std::cerr << "sizes: " << dist.size() << " tokens, largest " << (dist.empty() ? 0.0 : dist.front()) << '\n';
    return 0;
  }
  if (a.gt.empty()) throw ValidationError("metrics " + a.kind + ": --gt is required");
  const auto gt = read_gt_boundary(a.gt);
  if (a.kind == "pr") {
    a.pr.exclude_border = !a.keep_border;
    const auto r = boundary_pr(pred, gt, a.pr);
    std::cout << "precision,recall\n" << r.precision << ',' << r.recall << '\n';
    std::cerr << "boundary precision " << r.precision << ", recall " << r.recall << '\n';
  } else {
    const double m = monosemanticity(pred, gt, a.mono);
    std::cout << "monosemanticity\n" << m << '\n';
    std::cerr << "monosemantic fraction " << m << " over " << pred.n_tokens() << " tokens\n";
  }
  return 0;
}

// embed -------------------------------------------------------------------

struct EmbedArgs {
  std::string features, image, seg, weights, out;
  int mask_res = 16;
  std::string upsample = "bilinear";
};

int run_embed(const EmbedArgs& a) {
  if (a.features.empty() == a.image.empty()) throw ValidationError("embed: give exactly one of --features or --image");
  const auto seg = read_seg(a.seg);
  auto feats = a.image.empty() ? read_fmap(a.features) : image_features(read_png(a.image));
  feats = upsample(feats, seg.height(), seg.width(),
                   a.upsample == "nearest" ? UpsampleMode::nearest : UpsampleMode::bilinear);
  const auto content = content_embed(feats, seg);
  const auto position = position_embed(seg, a.mask_res);
  const auto out = a.weights.empty() ? concat(content, position) : fuse(content, position, read_mlp(a.weights));
  write_fmap(a.out, out.to_fmap());
  std::cout << "tokens,dim\n" << out.rows() << ',' << out.dim() << '\n';
  std::cerr << "embed: " << out.rows() << " x " << out.dim() << " -> " << a.out << '\n';
  return 0;
}

// truncate ----------------------------------------------------------------

struct TruncateArgs {
  std::string seg, strategy = "smallest-first";
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

int run_truncate(const TruncateArgs& a) {
  const auto seg = read_seg(a.seg);
  const auto strategy = a.strategy == "random" ? TruncationStrategy::random : TruncationStrategy::smallest_first;
  const auto r = truncate(seg, a.budget, strategy, a.seed);
  const auto areas = seg.areas();
  std::cout << "id,area\n";
  for (auto id : r.retained) std::cout << id << ',' << areas[id] << '\n';
  std::cerr << "truncate: kept " << r.retained.size() << " of " << seg.n_tokens() << " tokens, area fraction "
            << r.area_fraction << '\n';
  return 0;
}

// bench -------------------------------------------------------------------

struct BenchArgs {
  MethodFlags flags;
  std::vector<int> workers{1};
  int batch = 10;
  std::optional<std::size_t> count;
  std::optional<double> seconds;
  int size = 768;
  std::string input_dir, out;
  std::uint64_t seed = 0;
};

int run_bench_cmd(const BenchArgs& a) {
  BenchConfig cfg;
  cfg.tokenizer = a.flags.spec(WatershedConfig{}.threshold);
  cfg.worker_counts = a.workers;
  cfg.batch_size = a.batch;
  cfg.count = a.count;
  cfg.seconds = a.seconds;
  if (!cfg.count && !cfg.seconds) cfg.count = 10;
  cfg.image_size = a.size;
  cfg.input_dir = a.input_dir;
  cfg.seed = a.seed;
  const auto report = run_bench(cfg);
  std::ofstream file;
  auto& out = open_out(a.out, file);
  report.write_csv(out);
  out.flush();
  report_written(a.out, out);
  for (const auto& l : report.levels) {
    std::cerr << "bench: " << l.workers << " worker(s), " << l.images << " images in " << l.seconds << " s, "
              << l.fps << " fps\n";
  }
  std::cerr << "bench: peak " << report.peak_fps << " fps\n";
  return 0;
}

// visualize ---------------------------------------------------------------

struct VisualizeArgs {
  std::string seg, base, out;
  double alpha = 0.5;
};

int run_visualize(const VisualizeArgs& a) {
  const auto seg = read_seg(a.seg);
  std::optional<RasterImage> base;
  if (!a.base.empty()) base = read_png(a.base);
  write_png(a.out, visualize(seg, base, a.alpha));
  std::cerr << "visualize: " << seg.n_tokens() << " tokens -> " << a.out << '\n';
  return 0;
}

CLI::App* find_subcommand(CLI::App& app, int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    for (auto* sub : app.get_subcommands({})) {
      if (sub->get_name() == argv[i]) return sub;
    }
  }
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subobject-level image tokenization toolkit", "epoc"};
  app.require_subcommand(1);
  std::cout.precision(10);
  std::cerr.precision(4);

  const std::vector<std::string> methods{"patch", "slic", "epoc"};

  TokenizeArgs tok;
  auto* tokenize = app.add_subcommand("tokenize", "Segment an image or boundary map into a SEG file");
  tokenize->add_option("--method", tok.flags.method, "patch, slic or epoc")
      ->required()
      ->check(CLI::IsMember(methods));
  tok.flags.add_to(*tokenize);
  tokenize->add_option("--input", tok.input, "input PNG image");
  tokenize->add_option("--boundary", tok.boundary, "epoc: boundary map (FMAP or grayscale PNG)");
  tokenize->add_option("--out", tok.out, "output SEG file")->required();

  BoundaryArgs bnd;
  auto* boundary = app.add_subcommand("boundary", "Derive a gradient boundary map from an image");
  boundary->add_option("--input", bnd.input, "input PNG image")->required();
  boundary->add_option("--radius", bnd.radius, "box blur radius before the gradient")->capture_default_str();
  boundary->add_option("--out", bnd.out, "output FMAP file")->required();

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "Evaluate a segmentation: pr, mono or sizes");
  metrics->add_option("kind", met.kind, "pr, mono or sizes")
      ->required()
      ->check(CLI::IsMember({"pr", "mono", "sizes"}));
  metrics->add_option("--pred", met.pred, "predicted SEG file")->required();
  metrics->add_option("--gt", met.gt, "ground truth: SEG file or PNG boundary mask");
  metrics->add_option("--tol-recall", met.pr.recall_tolerance, "recall tolerance (px)")->capture_default_str();
  metrics->add_option("--tol-precision", met.pr.precision_tolerance, "precision tolerance (px)")
      ->capture_default_str();
  metrics->add_option("--tol-mono", met.mono.erosion_tolerance, "monosemanticity erosion radius (px)")->capture_default_str();
  metrics->add_flag("--keep-border", met.keep_border, "pr: keep the image border ring in both boundary sets");

  EmbedArgs emb;
  auto* embed = app.add_subcommand("embed", "Build per-token embeddings as an N x D FMAP");
  embed->add_option("--features", emb.features, "feature map FMAP");
  embed->add_option("--image", emb.image, "PNG image used as raw pixel features");
  embed->add_option("--seg", emb.seg, "SEG file")->required();
  embed->add_option("--mask-res", emb.mask_res, "shape mask resolution")->capture_default_str();
  embed->add_option("--weights", emb.weights, "MLP1 fusion weights; plain concatenation when absent");
  embed->add_option("--upsample", emb.upsample, "bilinear or nearest")
      ->capture_default_str()
      ->check(CLI::IsMember({"bilinear", "nearest"}));
  embed->add_option("--out", emb.out, "output FMAP file")->required();

  TruncateArgs trn;
  auto* trunc = app.add_subcommand("truncate", "Keep at most a budget of tokens");
  trunc->add_option("--seg", trn.seg, "SEG file")->required();
  trunc->add_option("--budget", trn.budget, "maximum number of tokens kept")->required();
  trunc->add_option("--strategy", trn.strategy, "smallest-first or random")
      ->capture_default_str()
      ->check(CLI::IsMember({"smallest-first", "random"}));
  trunc->add_option("--seed", trn.seed, "random strategy seed")->capture_default_str();

  BenchArgs ben;
  auto* bench = app.add_subcommand("bench", "Measure tokenizer throughput across worker counts");
  bench->add_option("--method", ben.flags.method, "patch, slic or epoc")
      ->required()
      ->check(CLI::IsMember(methods));
  ben.flags.add_to(*bench);
  bench->add_option("--workers", ben.workers, "ascending worker levels, e.g. 1,2,4")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--batch", ben.batch, "images per batch")->capture_default_str();
  auto* count = bench->add_option("--count", ben.count, "images per level (default 10)");
  bench->add_option("--seconds", ben.seconds, "wall seconds per level")->excludes(count);
  bench->add_option("--size", ben.size, "synthetic image side")->capture_default_str();
  bench->add_option("--input-dir", ben.input_dir, "directory of PNG inputs instead of synthetic images");
  bench->add_option("--seed", ben.seed, "synthetic image seed")->capture_default_str();
  bench->add_option("--out", ben.out, "CSV report path (stdout when absent)");

  VisualizeArgs vis;
  auto* visual = app.add_subcommand("visualize", "Render a SEG file as a colored PNG");
  visual->add_option("--seg", vis.seg, "SEG file")->required();
  visual->add_option("--base", vis.base, "PNG to blend under the token colors");
  visual->add_option("--alpha", vis.alpha, "token color opacity in [0,1]")->capture_default_str();
  visual->add_option("--out", vis.out, "output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    auto* sub = find_subcommand(app, argc, argv);
    std::cerr << "error: " << e.what() << "\n\n" << (sub ? sub->help("epoc") : app.help());
    return kExitValidation;
  }

  try {
    if (*tokenize) return run_tokenize(tok);
    if (*boundary) return run_boundary(bnd);
    if (*metrics) return run_metrics(met);
    if (*embed) return run_embed(emb);
    if (*trunc) return run_truncate(trn);
    if (*bench) return run_bench_cmd(ben);
    if (*visual) return run_visualize(vis);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
