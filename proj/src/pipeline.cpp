#include "dep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "dep/encoding.hpp"
#include "dep/grad_check.hpp"
#include "dep/svg.hpp"
#include "dep/textures.hpp"

namespace dep {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

TextureModel build_model(const PipelineConfig& cfg, Index classes) {
  HeadConfig head = cfg.head;
  head.classes = classes;
  const std::uint64_t model_seed = Rng(cfg.seed).stream(0x40u).next_u64();
  return TextureModel(cfg.backbone, head, model_seed);
}

void cmd_gen_data(const PipelineConfig& cfg, const fs::path& out_dir) {
  GeneratedDataset ds = generate(default_specs(), cfg.dataset_per_class, cfg.dataset_size, cfg.seed,
                                 cfg.dataset_noise);
  ordered_json manifest = ordered_json::parse(ds.manifest_json);
  manifest["config_hash"] = cfg.hash();
  save_dataset(out_dir, ds.train, ds.test, manifest.dump(2));
  std::cout << "wrote " << ds.train.items.size() << " train / " << ds.test.items.size()
            << " test images to " << out_dir.string() << "\n";
}

namespace {

std::vector<std::vector<std::string>> cm_rows(const ConfusionMatrix& cm) {
  std::vector<std::vector<std::string>> rows;
  const int k = static_cast<int>(cm.classes.size());
  for (int r = 0; r < k; ++r) {
    std::vector<std::string> row{cm.classes[static_cast<std::size_t>(r)]};
    for (int c = 0; c < k; ++c) row.push_back(std::to_string(cm.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_confusion_csv(const fs::path& path, const ConfusionMatrix& cm, const std::string& hash) {
  std::vector<std::string> header{"class"};
  header.insert(header.end(), cm.classes.begin(), cm.classes.end());
  write_csv(path, hash, header, cm_rows(cm));
}

PipelineConfig config_from_checkpoint(const CheckpointMeta& meta) {
  PipelineConfig cfg = PipelineConfig::defaults();
  cfg.apply_file_text(meta.config_text);
  return cfg;
}

}  // namespace

TrainOutputs cmd_train(const PipelineConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                       const fs::path& resume_dir) {
  auto [train_set, test_set] = load_dataset(data_dir);
  TextureModel model = build_model(cfg, static_cast<Index>(train_set.classes.size()));
  SgdOptimizer opt(cfg.train.momentum);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;

  int start_epoch = 0;
  if (!resume_dir.empty()) {
    const CheckpointMeta meta = load_checkpoint_meta(resume_dir);
    if (meta.config_hash != cfg.hash())
      throw ConfigError("train: checkpoint config hash " + meta.config_hash +
                        " does not match current config " + cfg.hash() + "; refusing to resume");
    load_checkpoint_params(resume_dir, model.parameters(), &opt.velocities());
    start_epoch = meta.epoch;
  }

  fs::create_directories(out_dir);
  const std::string hash = cfg.hash();
  const fs::path ckpt_dir = out_dir / "checkpoint";

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    ordered_json rec;
    rec["epoch"] = m.epoch;
    rec["lr"] = m.lr;
    rec["train_loss"] = m.train_loss;
    rec["eval_acc"] = m.eval_acc;
    rec["config_hash"] = hash;
    append_line(out_dir / "metrics.jsonl", rec.dump());
  };
  hooks.at_checkpoint = [&](int epoch, const ChannelStats& stats) {
    CheckpointMeta meta;
    meta.config_text = cfg.canonical();
    meta.config_hash = hash;
    meta.epoch = epoch;
    meta.seed = cfg.seed;
    meta.variant = to_string(cfg.head.variant);
    meta.stats = stats;
    meta.classes = train_set.classes;
    save_checkpoint(ckpt_dir, model.parameters(), opt.velocities(), meta);
  };

  TrainResult result = train_model(model, opt, train_set, test_set, tc, start_epoch, hooks);

  write_confusion_csv(out_dir / "confusion.csv", result.final_eval.cm, hash);
  ordered_json summary;
  summary["config_hash"] = hash;
  summary["variant"] = to_string(cfg.head.variant);
  summary["epochs"] = cfg.train.epochs;
  summary["final_acc"] = result.final_eval.accuracy;
  summary["classes"] = train_set.classes;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "final accuracy " << result.final_eval.accuracy << " (variant "
            << to_string(cfg.head.variant) << ")\n";
  return TrainOutputs{result.final_eval.accuracy, ckpt_dir};
}

double cmd_eval(const fs::path& data_dir, const fs::path& ckpt_dir, const fs::path& out_dir) {
  const CheckpointMeta meta = load_checkpoint_meta(ckpt_dir);
  const PipelineConfig cfg = config_from_checkpoint(meta);
  auto [train_set, test_set] = load_dataset(data_dir);
  if (train_set.classes != meta.classes)
    throw DataError("eval: dataset classes do not match checkpoint classes");
  TextureModel model = build_model(cfg, static_cast<Index>(meta.classes.size()));
  load_checkpoint_params(ckpt_dir, model.parameters(), nullptr);
  const EvalResult result = evaluate(model, test_set, meta.stats, cfg.train);
  fs::create_directories(out_dir);
  write_confusion_csv(out_dir / "confusion.csv", result.cm, meta.config_hash);
  ordered_json summary;
  summary["config_hash"] = meta.config_hash;
  summary["variant"] = meta.variant;
  summary["accuracy"] = result.accuracy;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "accuracy " << result.accuracy << "\n";
  return result.accuracy;
}

void cmd_extract(const fs::path& data_dir, const fs::path& ckpt_dir, const std::string& layer,
                 const std::string& split, const fs::path& out_dir) {
  const CheckpointMeta meta = load_checkpoint_meta(ckpt_dir);
  const PipelineConfig cfg = config_from_checkpoint(meta);
  TextureModel model = build_model(cfg, static_cast<Index>(meta.classes.size()));
  load_checkpoint_params(ckpt_dir, model.parameters(), nullptr);
  const Index dim = model.tap_dim(layer);  // rejects unknown layers

  auto [train_set, test_set] = load_dataset(data_dir);
  std::vector<const LabeledImage*> items;
  std::vector<std::string> splits;
  if (split == "train" || split == "all")
    for (const LabeledImage& it : train_set.items) {
      items.push_back(&it);
      splits.push_back("train");
    }
  if (split == "test" || split == "all")
    for (const LabeledImage& it : test_set.items) {
      items.push_back(&it);
      splits.push_back("test");
    }
  if (split != "train" && split != "test" && split != "all")
    throw ConfigError("extract: split must be train, test or all");
  if (items.empty()) throw DataError("extract: no samples in split '" + split + "'");

  Tensor features({static_cast<Index>(items.size()), dim});
  std::vector<std::vector<std::string>> meta_rows;
  const int batch = cfg.train.batch;
  for (std::size_t start = 0; start < items.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(items.size(), start + static_cast<std::size_t>(batch));
    const Index bs = static_cast<Index>(end - start);
    Tensor images;
    {
      Tensor first = eval_preprocess(items[start]->image, cfg.train, meta.stats);
      images = Tensor({bs, first.dim(0), first.dim(1), first.dim(2)});
      std::copy(first.data(), first.data() + first.size(), images.data());
      for (std::size_t i = start + 1; i < end; ++i) {
        Tensor img = eval_preprocess(items[i]->image, cfg.train, meta.stats);
        std::copy(img.data(), img.data() + img.size(),
                  images.data() + static_cast<Index>(i - start) * img.size());
      }
    }
    Graph g;
    Binder bind(g);
    auto fwd = model.forward(g, bind, g.leaf(std::move(images)), Mode::Eval);
    const Tensor& tap = fwd.tap(layer).value();
    std::copy(tap.data(), tap.data() + tap.size(), features.data() + static_cast<Index>(start) * dim);
  }
  for (std::size_t i = 0; i < items.size(); ++i)
    meta_rows.push_back({items[i]->id, splits[i],
                         meta.classes[static_cast<std::size_t>(items[i]->label)],
                         std::to_string(items[i]->label)});

  fs::create_directories(out_dir);
  save_tnsr(out_dir / "features.tnsr", features);
  write_csv(out_dir / "features_meta.csv", meta.config_hash, {"id", "split", "class", "label"},
            meta_rows);
  std::cout << "extracted " << items.size() << " x " << dim << " features (layer " << layer << ")\n";
}

std::vector<EmbeddingRow> parse_embedding_rows(const CsvTable& table) {
  if (table.header != std::vector<std::string>{"id", "x", "y", "split", "class"})
    throw FormatError("embedding csv: unexpected header");
  std::vector<EmbeddingRow> rows;
  for (const auto& r : table.rows) {
    if (r.size() != 5) throw FormatError("embedding csv: bad row width");
    rows.push_back(EmbeddingRow{r[0], std::stod(r[1]), std::stod(r[2]), r[3], r[4]});
  }
  return rows;
}

std::vector<std::array<double, 2>> class_centroids(const std::vector<EmbeddingRow>& rows,
                                                   const std::vector<std::string>& classes) {
  std::vector<std::array<double, 2>> centroids(classes.size(), {0, 0});
  std::vector<double> counts(classes.size(), 0);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
  for (const EmbeddingRow& r : rows) {
    auto it = index.find(r.cls);
    if (it == index.end()) throw DataError("embedding: unknown class '" + r.cls + "'");
    centroids[it->second][0] += r.x;
    centroids[it->second][1] += r.y;
    counts[it->second] += 1;
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (counts[i] == 0) throw DataError("embedding: class '" + classes[i] + "' has no points");
    centroids[i][0] /= counts[i];
    centroids[i][1] /= counts[i];
  }
  return centroids;
}

std::vector<int> order_classes_1d(const std::vector<std::array<double, 2>>& centroids) {
  const std::size_t k = centroids.size();
  double mx = 0, my = 0;
  for (const auto& c : centroids) {
    mx += c[0];
    my += c[1];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double cxx = 0, cyy = 0, cxy = 0;
  for (const auto& c : centroids) {
    cxx += (c[0] - mx) * (c[0] - mx);
    cyy += (c[1] - my) * (c[1] - my);
    cxy += (c[0] - mx) * (c[1] - my);
  }
  const double theta = 0.5 * std::atan2(2 * cxy, cxx - cyy);
  const double ax = std::cos(theta), ay = std::sin(theta);
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> proj(k);
  for (std::size_t i = 0; i < k; ++i)
    proj[i] = ax * (centroids[i][0] - mx) + ay * (centroids[i][1] - my);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return proj[static_cast<std::size_t>(a)] < proj[static_cast<std::size_t>(b)]; });
  return order;
}

double mean_adjacent_distance(const std::vector<std::array<double, 2>>& centroids,
                              const std::vector<int>& order) {
  double sum = 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const auto& a = centroids[static_cast<std::size_t>(order[i])];
    const auto& b = centroids[static_cast<std::size_t>(order[i + 1])];
    sum += std::hypot(a[0] - b[0], a[1] - b[1]);
  }
  return sum / static_cast<double>(order.size() - 1);
}

void cmd_manifold(const PipelineConfig& cfg, const fs::path& features_tnsr, const fs::path& meta_csv,
                  const fs::path& out_dir) {
  const Tensor features = load_tnsr(features_tnsr);
  if (features.rank() != 2)
    throw FormatError("manifold: features must be rank 2, got " + shape_str(features.shape()));
  const CsvTable meta = read_csv(meta_csv);
  if (meta.header != std::vector<std::string>{"id", "split", "class", "label"})
    throw FormatError("manifold: unexpected feature metadata header");
  if (static_cast<Index>(meta.rows.size()) != features.dim(0))
    throw DataError("manifold: metadata rows do not match feature rows");

  std::vector<std::size_t> train_rows;
  for (std::size_t i = 0; i < meta.rows.size(); ++i)
    if (meta.rows[i][1] == "train") train_rows.push_back(i);
  if (train_rows.empty()) throw DataError("manifold: no training-split features");

  // Fig-style protocol: fit the embedding on a random training subset.
  Rng subset_rng = Rng(cfg.seed).stream(0x70u);
  for (std::size_t i = train_rows.size(); i > 1; --i)
    std::swap(train_rows[i - 1], train_rows[static_cast<std::size_t>(subset_rng.uniform_int(i))]);
  if (static_cast<int>(train_rows.size()) > cfg.tsne_train_subset)
    train_rows.resize(static_cast<std::size_t>(cfg.tsne_train_subset));
  std::sort(train_rows.begin(), train_rows.end());

  const Index n_fit = static_cast<Index>(train_rows.size());
  if (static_cast<double>(n_fit) < 4 * cfg.tsne.perplexity)
    throw ParameterError("manifold: need at least 4*perplexity = " +
                         std::to_string(4 * cfg.tsne.perplexity) +
                         " training features, got " + std::to_string(n_fit) +
                         "; lower tsne.perplexity or extract more features");

  MatrixRM fit_features(n_fit, features.dim(1));
  std::vector<std::string> fit_ids;
  for (Index i = 0; i < n_fit; ++i) {
    const std::size_t row = train_rows[static_cast<std::size_t>(i)];
    fit_features.row(i) = features.as_mat(features.dim(0), features.dim(1)).row(static_cast<Index>(row));
    fit_ids.push_back(meta.rows[row][0]);
  }

  TsneConfig tsne_cfg = cfg.tsne;
  tsne_cfg.seed = Rng(cfg.seed).stream(0x71u).next_u64();
  EmbeddedDistribution targets = tsne_fit(fit_features, tsne_cfg, fit_ids);

  const std::string hash = cfg.hash();
  fs::create_directories(out_dir);
  {
    std::vector<std::vector<std::string>> rows;
    for (Index i = 0; i < n_fit; ++i)
      rows.push_back({targets.ids[static_cast<std::size_t>(i)], fmt_g17(targets.coords(i, 0)),
                      fmt_g17(targets.coords(i, 1))});
    write_csv(out_dir / "tsne_targets.csv", hash, {"id", "x", "y"}, rows);
    save_tnsr(out_dir / "tsne_targets.tnsr",
              Tensor({n_fit, 2}, std::vector<double>(targets.coords.data(),
                                                     targets.coords.data() + n_fit * 2)));
    ordered_json sidecar;
    sidecar["config_hash"] = hash;
    sidecar["n"] = n_fit;
    sidecar["perplexity"] = tsne_cfg.perplexity;
    sidecar["pca_dims"] = tsne_cfg.pca_dims;
    sidecar["iters"] = tsne_cfg.iters;
    sidecar["exaggeration"] = tsne_cfg.exaggeration;
    sidecar["exagg_iters"] = tsne_cfg.exagg_iters;
    sidecar["lr"] = tsne_cfg.lr;
    sidecar["final_kl"] = targets.final_kl;
    write_text_file(out_dir / "tsne_targets.json", sidecar.dump(2) + "\n");
  }

  RegressorConfig rc = cfg.regressor;
  rc.input_dim = features.dim(1);
  rc.seed = Rng(cfg.seed).stream(0x72u).next_u64();
  ManifoldModel model(rc, rc.seed);
  Tensor fit_tensor({n_fit, features.dim(1)},
                    std::vector<double>(fit_features.data(), fit_features.data() + fit_features.size()));
  const RegressorTrainResult train_result = train_regressor(model, fit_tensor, fit_ids, targets, rc);

  const Tensor all_coords = embed(model, features);
  {
    std::vector<std::vector<std::string>> rows;
    std::vector<ScatterPoint> points;
    std::set<std::string> class_set;
    for (const auto& r : meta.rows) class_set.insert(r[2]);
    std::vector<std::string> classes(class_set.begin(), class_set.end());
    for (std::size_t i = 0; i < meta.rows.size(); ++i) {
      const Index row = static_cast<Index>(i);
      rows.push_back({meta.rows[i][0], fmt_g17(all_coords.at(row, 0)), fmt_g17(all_coords.at(row, 1)),
                      meta.rows[i][1], meta.rows[i][2]});
      const auto it = std::find(classes.begin(), classes.end(), meta.rows[i][2]);
      points.push_back(ScatterPoint{all_coords.at(row, 0), all_coords.at(row, 1),
                                    static_cast<int>(it - classes.begin()),
                                    meta.rows[i][1] == "test"});
    }
    write_csv(out_dir / "embedding.csv", hash, {"id", "x", "y", "split", "class"}, rows);
    write_text_file(out_dir / "embedding.svg", scatter_svg(points, classes, hash));

    CheckpointMeta ck;
    ck.config_text = cfg.canonical();
    ck.config_hash = hash;
    ck.epoch = rc.epochs;
    ck.seed = cfg.seed;
    ck.variant = "manifold";
    ck.classes = classes;
    std::map<std::string, Tensor> no_velocities;
    save_checkpoint(out_dir / "regressor", model.parameters(), no_velocities, ck);
  }

  ordered_json summary;
  summary["config_hash"] = hash;
  summary["n_fit"] = n_fit;
  summary["n_embedded"] = features.dim(0);
  summary["tsne_final_kl"] = targets.final_kl;
  summary["initial_mse"] = train_result.initial_mse;
  summary["final_mse"] = train_result.final_mse;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "manifold: fit " << n_fit << " targets, final regressor MSE "
            << train_result.final_mse << "\n";
}

void cmd_confusion(const fs::path& cm_csv, const fs::path& embedding_csv, const fs::path& out_dir,
                   bool force) {
  const CsvTable cm_table = read_csv(cm_csv);
  const CsvTable emb_table = read_csv(embedding_csv);
  if (!force && !cm_table.config_hash.empty() && !emb_table.config_hash.empty() &&
      cm_table.config_hash != emb_table.config_hash)
    throw DataError("confusion: config hash mismatch between " + cm_csv.string() + " (" +
                    cm_table.config_hash + ") and " + embedding_csv.string() + " (" +
                    emb_table.config_hash + "); pass --force to override");

  if (cm_table.header.empty() || cm_table.header[0] != "class")
    throw FormatError("confusion: expected 'class' header in " + cm_csv.string());
  std::vector<std::string> classes(cm_table.header.begin() + 1, cm_table.header.end());
  const int k = static_cast<int>(classes.size());
  if (static_cast<int>(cm_table.rows.size()) != k)
    throw FormatError("confusion: matrix is not square in " + cm_csv.string());
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k * k));
  for (int r = 0; r < k; ++r) {
    if (cm_table.rows[static_cast<std::size_t>(r)][0] != classes[static_cast<std::size_t>(r)])
      throw FormatError("confusion: row order does not match header order");
    for (int c = 0; c < k; ++c)
      counts[static_cast<std::size_t>(r * k + c)] =
          std::stoll(cm_table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c) + 1]);
  }

  const std::vector<EmbeddingRow> rows = parse_embedding_rows(emb_table);
  std::set<std::string> embedding_classes;
  for (const EmbeddingRow& r : rows) embedding_classes.insert(r.cls);
  if (embedding_classes != std::set<std::string>(classes.begin(), classes.end()))
    throw DataError("confusion: class sets of matrix and embedding disagree");

  const auto centroids = class_centroids(rows, classes);
  const std::vector<int> order = order_classes_1d(centroids);

  std::vector<std::string> ordered_classes;
  for (int i : order) ordered_classes.push_back(classes[static_cast<std::size_t>(i)]);
  std::vector<std::int64_t> ordered_counts(static_cast<std::size_t>(k * k));
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c)
      ordered_counts[static_cast<std::size_t>(r * k + c)] = counts[static_cast<std::size_t>(
          order[static_cast<std::size_t>(r)] * k + order[static_cast<std::size_t>(c)])];

  const std::string hash = cm_table.config_hash;
  fs::create_directories(out_dir);
  {
    std::vector<std::string> header{"class"};
    header.insert(header.end(), ordered_classes.begin(), ordered_classes.end());
    std::vector<std::vector<std::string>> out_rows;
    for (int r = 0; r < k; ++r) {
      std::vector<std::string> row{ordered_classes[static_cast<std::size_t>(r)]};
      for (int c = 0; c < k; ++c)
        row.push_back(std::to_string(ordered_counts[static_cast<std::size_t>(r * k + c)]));
      out_rows.push_back(std::move(row));
    }
    write_csv(out_dir / "confusion_ordered.csv", hash, header, out_rows);
  }
  write_text_file(out_dir / "confusion.svg", heatmap_svg(ordered_counts, ordered_classes, hash));

  ordered_json summary;
  summary["config_hash"] = hash;
  summary["order"] = ordered_classes;
  summary["mean_adjacent_distance"] = mean_adjacent_distance(centroids, order);
  write_text_file(out_dir / "ordering.json", summary.dump(2) + "\n");
  std::cout << "confusion: ordered " << k << " classes, mean adjacent centroid distance "
            << mean_adjacent_distance(centroids, order) << "\n";
}

int cmd_grad_check() {
  struct Case {
    std::string name;
    double err;
    double tol;
  };
  std::vector<Case> cases;
  Rng rng(11);

  std::uint64_t draw = 0;
  auto randt = [&rng, &draw](Shape shape) {
    Tensor t(std::move(shape));
    Rng r = rng.stream(++draw);
    for (Index i = 0; i < t.size(); ++i) t[i] = r.normal();
    return t;
  };

  {
    Tensor a = randt({4, 5}), b = randt({5, 3});
    cases.push_back({"matmul",
                     grad_check([](Graph&, const std::vector<Var>& v) {
                       return sum(mul(matmul(v[0], v[1]), matmul(v[0], v[1])));
                     },
                                {&a, &b}),
                     1e-5});
  }
  {
    Tensor x = randt({2, 3, 6, 6}), k = randt({4, 3, 3, 3});
    cases.push_back({"conv2d",
                     grad_check([](Graph&, const std::vector<Var>& v) {
                       Var y = conv2d(v[0], v[1], 2, 1);
                       return sum(mul(y, y));
                     },
                                {&x, &k}),
                     1e-5});
  }
  {
    Tensor x = randt({3, 7});
    Tensor gmm = Tensor::ones({7}), bt = randt({7});
    Tensor w = randt({3, 7});
    BatchNormState st;
    cases.push_back({"batchnorm",
                     grad_check([&st, &w](Graph& g, const std::vector<Var>& v) {
                       Var y = batchnorm(v[0], v[1], v[2], &st, 1e-5, 0.1, Mode::Train);
                       return sum(mul(y, g.leaf(w)));
                     },
                                {&x, &gmm, &bt}),
                     1e-5});
  }
  {
    Tensor x = randt({3, 2}), c = randt({4, 2}), s = randt({4});
    cases.push_back({"encoding",
                     grad_check([](Graph&, const std::vector<Var>& v) {
                       Var e = encode(v[0], v[1], v[2]);
                       return sum(mul(e, e));
                     },
                                {&x, &c, &s}),
                     1e-5});
  }
  {
    Tensor a = randt({3, 4}), b = randt({3, 5});
    Tensor w = randt({3, 20});
    cases.push_back({"outer+l2norm",
                     grad_check([&w](Graph& g, const std::vector<Var>& v) {
                       Var y = l2_normalize_rows(outer_product(v[0], v[1]));
                       return sum(mul(y, g.leaf(w)));
                     },
                                {&a, &b}),
                     1e-5});
  }

  bool ok = true;
  for (const Case& c : cases) {
    const bool pass = c.err < c.tol;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.name << "  max rel err " << c.err << " (tol "
              << c.tol << ")\n";
  }
  if (!ok) throw NumericError("grad-check: at least one gradient check failed");
  return 0;
}

}  // namespace dep
