#include "qshield/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qshield/checkpoint.hpp"
#include "qshield/errors.hpp"
#include "qshield/rng.hpp"
#include "qshield/version.hpp"

namespace qshield::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(BoxMode mode) { return mode == BoxMode::White ? "white" : "black"; }

BoxMode parse_box_mode(std::string_view text) {
  if (text == "white") return BoxMode::White;
  if (text == "black") return BoxMode::Black;
  fail(Errc::InvalidArgument, "unknown box mode '" + std::string(text) + "'");
}

std::string_view to_string(AeMode mode) {
  return mode == AeMode::PerEpsilon ? "per-epsilon" : "shared";
}

AeMode parse_ae_mode(std::string_view text) {
  if (text == "per-epsilon") return AeMode::PerEpsilon;
  if (text == "shared") return AeMode::Shared;
  fail(Errc::InvalidArgument, "unknown autoencoder mode '" + std::string(text) + "'");
}

std::vector<double> ExperimentConfig::default_epsilons() {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(i / 20.0);
  return grid;
}

ExperimentConfig ExperimentConfig::desk_scale(std::uint64_t seed, BoxMode box) {
  ExperimentConfig c;
  c.seed = seed;
  c.box = box;
  c.attacker = {20, seed, diffsim::RotationKind::Euler, diffsim::Topology::Ring};
  c.evaluator = c.attacker;
  if (box == BoxMode::Black) c.evaluator = {40, seed + 1, c.attacker.rotation, c.attacker.topology};
  c.qvc_train.learning_rate = 0.005;
  c.qvc_train.batch_size = 32;
  c.qvc_train.epochs = 10;
  c.ae_train.learning_rate = 0.001;
  c.ae_train.batch_size = 32;
  c.ae_train.epochs = 10;
  c.train_per_class = 200;
  c.test_per_class = 50;
  return c;
}

ExperimentConfig ExperimentConfig::paper_scale(std::uint64_t seed, BoxMode box) {
  ExperimentConfig c;
  c.seed = seed;
  c.box = box;
  c.attacker = {100, seed, diffsim::RotationKind::Euler, diffsim::Topology::Ring};
  c.evaluator = c.attacker;
  if (box == BoxMode::Black) c.evaluator = {200, seed + 1, c.attacker.rotation, c.attacker.topology};
  c.qvc_train.learning_rate = 0.005;
  c.qvc_train.batch_size = 256;
  c.qvc_train.epochs = 20;
  c.ae_train.epochs = 20;
  return c;
}

void ExperimentConfig::validate() const {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(std::isfinite(epsilons[i]) && epsilons[i] >= 0.0, Errc::InvalidArgument,
            "epsilon grid values must be finite and non-negative");
    require(i == 0 || epsilons[i - 1] < epsilons[i], Errc::InvalidArgument,
            "epsilon grid must be strictly increasing");
  }
  if (box == BoxMode::White) {
    require(attacker == evaluator, Errc::InvalidArgument,
            "white-box runs need identical attacker and evaluator specs");
  } else {
    require(attacker != evaluator, Errc::InvalidArgument,
            "black-box runs need distinct attacker and evaluator specs");
  }
  require(attacker.n_layers >= 1 && evaluator.n_layers >= 1, Errc::InvalidArgument,
          "models need at least one layer");
  require(!attack.alpha || *attack.alpha > 0.0, Errc::InvalidArgument,
          "attack step size must be positive");
  require(attack.kind == attacks::AttackKind::Fgsm || attack.steps >= 1, Errc::InvalidArgument,
          "PGD needs at least one step");
  require(!train_per_class || *train_per_class >= 1, Errc::InvalidArgument,
          "train_per_class must be at least 1");
  require(!test_per_class || *test_per_class >= 1, Errc::InvalidArgument,
          "test_per_class must be at least 1");
  require(workers >= 1, Errc::InvalidArgument, "workers must be at least 1");
  qvc_train.validate();
  ae_train.validate();
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  require(obj.is_object(), Errc::InvalidArgument, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::find(known.begin(), known.end(), key) != known.end();
    require(ok, Errc::InvalidArgument,
            "unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_optional_size(const json& obj, const char* key, std::optional<std::size_t>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
  } else {
    out = obj.at(key).get<std::size_t>();
  }
}

json spec_json(const ModelSpec& s) {
  return {{"layers", s.n_layers},
          {"seed", s.seed},
          {"rotation", diffsim::to_string(s.rotation)},
          {"topology", diffsim::to_string(s.topology)}};
}

void read_spec(const json& obj, ModelSpec& s, std::string_view where) {
  reject_unknown(obj, {"layers", "seed", "rotation", "topology"}, where);
  read(obj, "layers", s.n_layers);
  read(obj, "seed", s.seed);
  if (obj.contains("rotation")) s.rotation = diffsim::parse_rotation(obj.at("rotation").get<std::string>());
  if (obj.contains("topology")) s.topology = diffsim::parse_topology(obj.at("topology").get<std::string>());
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json doc{
      {"dataset", dataio::to_string(c.dataset)},
      {"data_dir", c.data_dir ? json(*c.data_dir) : json(nullptr)},
      {"box", to_string(c.box)},
      {"attacker", spec_json(c.attacker)},
      {"evaluator", spec_json(c.evaluator)},
      {"attack",
       {{"kind", attacks::to_string(c.attack.kind)},
        {"alpha", c.attack.alpha ? json(*c.attack.alpha) : json(nullptr)},
        {"steps", c.attack.steps},
        {"clip_pixels", c.attack.clip_pixels},
        {"random_start", c.attack.random_start}}},
      {"epsilons", c.epsilons},
      {"qvc_train",
       {{"learning_rate", c.qvc_train.learning_rate},
        {"batch_size", c.qvc_train.batch_size},
        {"epochs", c.qvc_train.epochs},
        {"grad_mode", qvc::to_string(c.qvc_train.grad_mode)}}},
      {"ae_train",
       {{"learning_rate", c.ae_train.learning_rate},
        {"batch_size", c.ae_train.batch_size},
        {"epochs", c.ae_train.epochs},
        {"conv", c.ae_train.algo == cednet::ConvAlgo::Direct ? "direct" : "im2col"}}},
      {"train_per_class", optional_json(c.train_per_class)},
      {"test_per_class", optional_json(c.test_per_class)},
      {"ae_mode", to_string(c.ae_mode)},
      {"output_dir", c.output_dir.string()},
      {"seed", c.seed},
      {"workers", c.workers},
      {"use_cache", c.use_cache},
  };
  return doc.dump(2) + "\n";
}

ExperimentConfig config_from_json(std::string_view text, const ExperimentConfig& base) {
  ExperimentConfig c = base;
  try {
    const json doc = json::parse(text);
    reject_unknown(doc,
                   {"dataset", "data_dir", "box", "attacker", "evaluator", "attack", "epsilons",
                    "qvc_train", "ae_train", "train_per_class", "test_per_class", "ae_mode",
                    "output_dir", "seed", "workers", "use_cache"},
                   "config");
    if (doc.contains("dataset")) c.dataset = dataio::parse_dataset_name(doc.at("dataset").get<std::string>());
    if (doc.contains("data_dir")) {
      const auto& v = doc.at("data_dir");
      c.data_dir = v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>());
    }
    if (doc.contains("box")) c.box = parse_box_mode(doc.at("box").get<std::string>());
    if (doc.contains("attacker")) read_spec(doc.at("attacker"), c.attacker, "attacker");
    if (doc.contains("evaluator")) read_spec(doc.at("evaluator"), c.evaluator, "evaluator");
    if (doc.contains("attack")) {
      const json& a = doc.at("attack");
      reject_unknown(a, {"kind", "alpha", "steps", "clip_pixels", "random_start"}, "attack");
      if (a.contains("kind")) c.attack.kind = attacks::parse_attack_kind(a.at("kind").get<std::string>());
      if (a.contains("alpha")) {
        c.attack.alpha = a.at("alpha").is_null() ? std::nullopt
                                                 : std::optional<double>(a.at("alpha").get<double>());
      }
      read(a, "steps", c.attack.steps);
      read(a, "clip_pixels", c.attack.clip_pixels);
      read(a, "random_start", c.attack.random_start);
    }
    read(doc, "epsilons", c.epsilons);
    if (doc.contains("qvc_train")) {
      const json& q = doc.at("qvc_train");
      reject_unknown(q, {"learning_rate", "batch_size", "epochs", "grad_mode"}, "qvc_train");
      read(q, "learning_rate", c.qvc_train.learning_rate);
      read(q, "batch_size", c.qvc_train.batch_size);
      read(q, "epochs", c.qvc_train.epochs);
      if (q.contains("grad_mode")) c.qvc_train.grad_mode = qvc::parse_grad_mode(q.at("grad_mode").get<std::string>());
    }
    if (doc.contains("ae_train")) {
      const json& a = doc.at("ae_train");
      reject_unknown(a, {"learning_rate", "batch_size", "epochs", "conv"}, "ae_train");
      read(a, "learning_rate", c.ae_train.learning_rate);
      read(a, "batch_size", c.ae_train.batch_size);
      read(a, "epochs", c.ae_train.epochs);
      if (a.contains("conv")) {
        const auto conv = a.at("conv").get<std::string>();
        require(conv == "direct" || conv == "im2col", Errc::InvalidArgument,
                "ae_train.conv must be 'direct' or 'im2col'");
        c.ae_train.algo = conv == "direct" ? cednet::ConvAlgo::Direct : cednet::ConvAlgo::Im2col;
      }
    }
    read_optional_size(doc, "train_per_class", c.train_per_class);
    read_optional_size(doc, "test_per_class", c.test_per_class);
    if (doc.contains("ae_mode")) c.ae_mode = parse_ae_mode(doc.at("ae_mode").get<std::string>());
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
    read(doc, "seed", c.seed);
    read(doc, "workers", c.workers);
    read(doc, "use_cache", c.use_cache);
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("malformed config: ") + e.what());
  }
  return c;
}

std::string cache_key(std::string_view description) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(description.data());
  return dataio::sha256_hex({bytes, description.size()}).substr(0, 24);
}

// ---------------------------------------------------------------------------
// Experiment stages

namespace {

// Seed streams split off the global seed.
enum : std::uint64_t {
  kSubsetStream = 1,
  kAttackStream = 2,
  kAeStream = 3,
};
// Seed streams split off a model spec's seed.
enum : std::uint64_t {
  kInitStream = 1,
  kTrainStream = 2,
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string exact(double v) { return checkpoint::exact_double(v); }

std::string size_or_full(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : "full";
}

dataio::ImageSet concat(const std::vector<const dataio::ImageSet*>& parts) {
  std::size_t total = 0;
  for (const auto* p : parts) total += p->count;
  const auto& first = *parts.front();
  auto out = dataio::ImageSet::zeros(total, first.rows, first.cols);
  std::size_t at = 0;
  for (const auto* p : parts) {
    std::ranges::copy(p->pixels.data(), out.pixels.data().begin() + at * first.sample_size());
    at += p->count;
  }
  return out;
}

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& config) : cfg_(config) {
    cfg_.validate();
    cache_dir_ = cfg_.output_dir / "cache";
    if (cfg_.use_cache) fs::create_directories(cache_dir_);
  }

  report::RunReport run(const RowCallback& on_row) {
    report::RunReport rep;
    rep.timestamps["started_at"] = utc_now();
    load_data();

    const auto attacker_params = obtain_model(cfg_.attacker);
    const qvc::Qvc attacker(attacker_params);
    std::optional<qvc::Qvc> distinct_evaluator;
    if (cfg_.box == BoxMode::Black) distinct_evaluator.emplace(obtain_model(cfg_.evaluator));
    const qvc::Qvc& evaluator = distinct_evaluator ? *distinct_evaluator : attacker;

    fill_metadata(rep, attacker, evaluator);
    const double clean_acc =
        qvc::evaluate_accuracy(evaluator, data_.test.images, data_.test.labels, cfg_.workers);
    spdlog::info("clean accuracy of evaluator {}: {:.4f}", evaluator.tag(), clean_acc);

    std::optional<cednet::AeParams> shared_ae;
    if (cfg_.ae_mode == AeMode::Shared) {
      shared_ae = obtain_shared_autoencoder(attacker);
      std::erase_if(adversarials_, [](const auto& kv) { return kv.first.starts_with("train@"); });
    }

    for (double eps : cfg_.epsilons) {
      const auto& adv_test = obtain_adversarials(attacker, "test", data_.test, eps);
      cednet::AeParams ae;
      if (shared_ae) {
        ae = *shared_ae;
      } else {
        const auto& adv_train = obtain_adversarials(attacker, "train", data_.train, eps);
        ae = obtain_autoencoder({eps}, {&adv_train.adversarials});
        adversarials_.erase("train@" + exact(eps));
      }
      const double adv_acc = qvc::evaluate_accuracy(evaluator, adv_test.adversarials,
                                                    data_.test.labels, cfg_.workers);
      const auto recon = cednet::reconstruct_batch(ae, adv_test.adversarials, cfg_.workers);
      const double recon_acc =
          qvc::evaluate_accuracy(evaluator, recon, data_.test.labels, cfg_.workers);
      rep.rows.push_back({eps, clean_acc, adv_acc, recon_acc});
      spdlog::info("eps={:.3f} clean={:.4f} adv={:.4f} recon={:.4f}", eps, clean_acc, adv_acc,
                   recon_acc);
      adversarials_.erase("test@" + exact(eps));
      if (on_row) on_row(rep);
    }
    rep.timestamps["finished_at"] = utc_now();
    return rep;
  }

 private:
  void load_data() {
    const auto dir = dataio::resolve_data_dir(cfg_.data_dir);
    auto full = dataio::load_dataset(dir, cfg_.dataset);
    const std::uint64_t subset_seed = derive_seed(cfg_.seed, kSubsetStream);
    data_.name = full.name;
    data_.train = cfg_.train_per_class
                      ? dataio::subset(full.train, *cfg_.train_per_class,
                                       derive_seed(subset_seed, 1))
                      : std::move(full.train);
    data_.test = cfg_.test_per_class
                     ? dataio::subset(full.test, *cfg_.test_per_class, derive_seed(subset_seed, 2))
                     : std::move(full.test);
    data_desc_ = "qshield " + std::string(kVersion) + ";dataset=" +
                 std::string(dataio::to_string(cfg_.dataset)) +
                 ";train=" + size_or_full(cfg_.train_per_class) +
                 ";test=" + size_or_full(cfg_.test_per_class) +
                 ";seed=" + std::to_string(cfg_.seed);
    spdlog::info("dataset {}: {} train / {} test samples", dataio::to_string(cfg_.dataset),
                 data_.train.images.count, data_.test.images.count);
  }

  std::string model_desc(const ModelSpec& s) const {
    const auto& t = cfg_.qvc_train;
    return data_desc_ + ";qvc;layers=" + std::to_string(s.n_layers) +
           ";mseed=" + std::to_string(s.seed) + ";rot=" + std::string(diffsim::to_string(s.rotation)) +
           ";topo=" + std::string(diffsim::to_string(s.topology)) + ";lr=" + exact(t.learning_rate) +
           ";bs=" + std::to_string(t.batch_size) + ";epochs=" + std::to_string(t.epochs) +
           ";grad=" + std::string(qvc::to_string(t.grad_mode));
  }

  fs::path cache_path(std::string_view prefix, const std::string& desc) const {
    return cache_dir_ / (std::string(prefix) + "-" + cache_key(desc) + ".qshd");
  }

  std::optional<checkpoint::Checkpoint> cached(const fs::path& path) const {
    if (!cfg_.use_cache || !fs::exists(path)) return std::nullopt;
    try {
      return checkpoint::load(path);
    } catch (const Error& e) {
      spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
      return std::nullopt;
    }
  }

  void store(const checkpoint::Checkpoint& cp, const fs::path& path, const std::string& desc) {
    if (!cfg_.use_cache) return;
    auto tagged = cp;
    tagged.metadata["cache_description"] = desc;
    checkpoint::save(tagged, path);
  }

  qvc::QvcParams obtain_model(const ModelSpec& spec) {
    const auto desc = model_desc(spec);
    const auto path = cache_path("qvc", desc);
    if (auto cp = cached(path)) {
      spdlog::info("loaded cached model {}", path.string());
      return checkpoint::qvc_from_checkpoint(*cp, spec.n_layers);
    }
    auto init = qvc::init_params(spec.n_layers, derive_seed(spec.seed, kInitStream), spec.rotation,
                                 spec.topology);
    auto tc = cfg_.qvc_train;
    tc.seed = derive_seed(spec.seed, kTrainStream);
    tc.workers = cfg_.workers;
    spdlog::info("training {}-layer QVC for {} epochs", spec.n_layers, tc.epochs);
    auto result = qvc::train_qvc(tc, std::move(init), data_.train, data_.test,
                                 [](const qvc::EpochMetrics& m) {
                                   spdlog::info("  epoch {} loss {:.4f} eval acc {:.4f}", m.epoch,
                                                m.train_loss, m.eval_accuracy);
                                 });
    store(checkpoint::to_checkpoint(result.params), path, desc);
    return result.params;
  }

  const attacks::AdversarialBatch& obtain_adversarials(const qvc::Qvc& model,
                                                       const std::string& split_name,
                                                       const dataio::Split& split, double eps) {
    const auto memo_key = split_name + "@" + exact(eps);
    if (auto it = adversarials_.find(memo_key); it != adversarials_.end()) return it->second;

    attacks::AttackConfig ac = cfg_.attack;
    ac.epsilon = eps;
    ac.seed = derive_seed(derive_seed(cfg_.seed, kAttackStream), split_name == "train" ? 1 : 2);
    const auto desc = model_desc(cfg_.attacker) + ";split=" + split_name +
                      ";attack=" + std::string(attacks::to_string(ac.kind)) + ";eps=" + exact(eps) +
                      ";alpha=" + exact(ac.step_size()) + ";steps=" + std::to_string(ac.steps) +
                      ";clip=" + std::to_string(ac.clip_pixels) +
                      ";rs=" + std::to_string(ac.random_start) + ";aseed=" + std::to_string(ac.seed);
    adv_descs_[memo_key] = desc;
    const auto path = cache_path("adv", desc);

    attacks::AdversarialBatch batch;
    if (auto cp = cached(path)) {
      batch = checkpoint::adversarial_batch_from_checkpoint(*cp);
    } else if (eps == 0.0) {
      batch = {split.images, split.images, split.labels, ac, model.tag()};
    } else {
      spdlog::info("attacking {} split at eps={}", split_name, eps);
      const attacks::QvcTarget target(model);
      batch = attacks::attack_batch(target, split.images, split.labels, ac, cfg_.workers);
      store(checkpoint::to_checkpoint(batch), path, desc);
    }
    attacks::verify(batch);
    return adversarials_.emplace(memo_key, std::move(batch)).first->second;
  }

  cednet::AeParams obtain_autoencoder(const std::vector<double>& eps_values,
                                      const std::vector<const dataio::ImageSet*>& inputs) {
    const auto& t = cfg_.ae_train;
    std::string desc = "ae;lr=" + exact(t.learning_rate) + ";bs=" + std::to_string(t.batch_size) +
                       ";epochs=" + std::to_string(t.epochs) +
                       ";conv=" + std::to_string(static_cast<int>(t.algo));
    for (double eps : eps_values) desc += "|" + adv_descs_.at("train@" + exact(eps));
    const auto path = cache_path("ae", desc);
    if (auto cp = cached(path)) return checkpoint::autoencoder_from_checkpoint(*cp);

    std::vector<const dataio::ImageSet*> targets(inputs.size(), &data_.train.images);
    const auto in = concat(inputs);
    const auto target = concat(targets);
    auto tc = t;
    tc.workers = cfg_.workers;
    const std::uint64_t ae_base = derive_seed(cfg_.seed, kAeStream);
    tc.seed = eps_values.size() == 1 ? derive_seed(ae_base, std::bit_cast<std::uint64_t>(eps_values[0]))
                                     : ae_base;
    spdlog::info("training autoencoder on {} pairs for {} epochs", in.count, tc.epochs);
    auto result = cednet::train_autoencoder(
        in, target, tc, std::nullopt, [](std::size_t epoch, double loss) {
          spdlog::info("  ae epoch {} mse {:.6f}", epoch, loss);
        });
    store(checkpoint::to_checkpoint(result.params), path, desc);
    return result.params;
  }

  cednet::AeParams obtain_shared_autoencoder(const qvc::Qvc& attacker) {
    std::vector<const dataio::ImageSet*> inputs;
    for (double eps : cfg_.epsilons) {
      inputs.push_back(&obtain_adversarials(attacker, "train", data_.train, eps).adversarials);
    }
    return obtain_autoencoder(cfg_.epsilons, inputs);
  }

  void fill_metadata(report::RunReport& rep, const qvc::Qvc& attacker, const qvc::Qvc& evaluator) {
    auto& m = rep.metadata;
    m["code_version"] = kVersion;
    m["dataset"] = dataio::to_string(cfg_.dataset);
    m["box"] = to_string(cfg_.box);
    m["attack"] = attacks::to_string(cfg_.attack.kind);
    m["attack_steps"] = std::to_string(cfg_.attack.steps);
    m["attack_alpha"] = cfg_.attack.alpha ? exact(*cfg_.attack.alpha) : "epsilon/4";
    m["attacker_tag"] = attacker.tag();
    m["evaluator_tag"] = evaluator.tag();
    m["attacker_layers"] = std::to_string(cfg_.attacker.n_layers);
    m["evaluator_layers"] = std::to_string(cfg_.evaluator.n_layers);
    m["attacker_seed"] = std::to_string(cfg_.attacker.seed);
    m["evaluator_seed"] = std::to_string(cfg_.evaluator.seed);
    m["seed"] = std::to_string(cfg_.seed);
    m["train_samples"] = std::to_string(data_.train.images.count);
    m["test_samples"] = std::to_string(data_.test.images.count);
    m["ae_mode"] = to_string(cfg_.ae_mode);
    m["ae_at_eps0"] = cfg_.ae_mode == AeMode::Shared
                          ? "shared autoencoder trained on every grid epsilon"
                          : "autoencoder trained on clean pairs";
    m["grad_mode"] = qvc::to_string(cfg_.qvc_train.grad_mode);
  }

  ExperimentConfig cfg_;
  fs::path cache_dir_;
  dataio::DatasetSplit data_;
  std::string data_desc_;
  std::map<std::string, attacks::AdversarialBatch> adversarials_;
  std::map<std::string, std::string> adv_descs_;
};

}  // namespace

report::RunReport run_whitebox(const ExperimentConfig& config, const RowCallback& on_row) {
  require(config.box == BoxMode::White, Errc::InvalidArgument, "config is not a white-box run");
  return Experiment(config).run(on_row);
}

report::RunReport run_blackbox(const ExperimentConfig& config, const RowCallback& on_row) {
  require(config.box == BoxMode::Black, Errc::InvalidArgument, "config is not a black-box run");
  return Experiment(config).run(on_row);
}

report::RunReport run(const ExperimentConfig& config, const RowCallback& on_row) {
  return config.box == BoxMode::White ? run_whitebox(config, on_row)
                                      : run_blackbox(config, on_row);
}

}  // namespace qshield::pipeline
