#include "pulearn/run_config.hpp"

#include <fstream>
#include <set>

#include "pulearn/error.hpp"
#include "pulearn/seeding.hpp"

namespace pulearn {
namespace {

using nlohmann::json;

// Reads keys from one JSON object, tracking which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw InvalidInput("config: " + name("") + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> || std::is_same_v<T, int>) {
        if (!it->is_number_integer()) throw InvalidInput("expected an integer");
        if constexpr (!std::is_same_v<T, int>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<long long>() < 0) {
            throw InvalidInput("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw InvalidInput("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw InvalidInput("expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw InvalidInput("expected a string");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw InvalidInput("config: " + name(key) + ": " + e.what());
    }
  }

  void read_optional_count(const char* key, std::optional<std::size_t>& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    std::size_t v = 0;
    read(key, v);
    out = v;
  }

  void read_int_list(const char* key, std::vector<int>& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (!it->is_array()) throw InvalidInput("config: " + name(key) + ": expected an array of integers");
    out.clear();
    for (const auto& v : *it) {
      if (!v.is_number_integer()) throw InvalidInput("config: " + name(key) + ": expected an array of integers");
      out.push_back(v.get<int>());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw InvalidInput("config: unknown key '" + name(key) + "'");
    }
  }

  std::string name(const std::string& key) const {
    if (prefix_.empty()) return key.empty() ? "root" : key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void parse_dataset(const json& obj, DatasetSpec& d) {
  Section s(obj, "dataset");
  s.read("kind", d.kind);
  s.read("n", d.n);
  s.read("prior", d.prior);
  s.read("separation", d.separation);
  s.read("noise", d.noise);
  s.read("labeled", d.labeled);
  s.read("path", d.path);
  s.read("label_column", d.label_column);
  s.read("positive_value", d.positive_value);
  s.read_optional_count("unlabeled_cap", d.unlabeled_cap);
  s.read("standardize", d.standardize);
  s.reject_unknown();
  if (d.kind != "gaussians" && d.kind != "moons" && d.kind != "csv") {
    throw InvalidInput("config: dataset.kind: expected gaussians|moons|csv, got '" + d.kind + "'");
  }
  if (d.kind == "csv" && d.path.empty()) throw InvalidInput("config: dataset.path: required for csv datasets");
}

void parse_trainer(const json& obj, TrainerConfig& t) {
  Section s(obj, "trainer");
  std::string loss(to_string(t.loss));
  std::string consistency(to_string(t.toggles.consistency));
  s.read("loss", loss);
  s.read("order", t.taylor_order);
  s.read("alpha", t.alpha);
  s.read("beta", t.beta);
  s.read("pseudo_batches", t.pseudo_batches);
  s.read("epochs", t.epochs);
  s.read("lr", t.optimizer.base_lr);
  s.read("momentum", t.optimizer.momentum);
  s.read("weight_decay", t.optimizer.weight_decay);
  s.read("gamma", t.optimizer.gamma);
  s.read_int_list("hidden_layers", t.hidden_layers);
  s.read("threshold", t.threshold);
  s.read("use_ema", t.toggles.use_ema);
  s.read("consistency", consistency);
  s.reject_unknown();
  try {
    t.loss = parse_loss_choice(loss);
    t.toggles.consistency = parse_consistency(consistency);
    validate(t);
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("config: trainer.") + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");
  root.read("seed", cfg.seed);
  root.read("output_dir", cfg.output_dir);
  if (const json* d = root.child("dataset")) parse_dataset(*d, cfg.dataset);
  if (const json* t = root.child("trainer")) parse_trainer(*t, cfg.trainer);
  root.reject_unknown();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
  const auto& d = cfg.dataset;
  const auto& t = cfg.trainer;
  json dataset = {{"kind", d.kind},
                  {"n", d.n},
                  {"prior", d.prior},
                  {"separation", d.separation},
                  {"noise", d.noise},
                  {"labeled", d.labeled},
                  {"path", d.path},
                  {"label_column", d.label_column},
                  {"positive_value", d.positive_value},
                  {"unlabeled_cap", d.unlabeled_cap ? json(*d.unlabeled_cap) : json(nullptr)},
                  {"standardize", d.standardize}};
  json trainer = {{"loss", to_string(t.loss)},
                  {"order", t.taylor_order},
                  {"alpha", t.alpha},
                  {"beta", t.beta},
                  {"pseudo_batches", t.pseudo_batches},
                  {"epochs", t.epochs},
                  {"lr", t.optimizer.base_lr},
                  {"momentum", t.optimizer.momentum},
                  {"weight_decay", t.optimizer.weight_decay},
                  {"gamma", t.optimizer.gamma},
                  {"hidden_layers", t.hidden_layers},
                  {"threshold", t.threshold},
                  {"use_ema", t.toggles.use_ema},
                  {"consistency", to_string(t.toggles.consistency)}};
  return {{"seed", cfg.seed}, {"output_dir", cfg.output_dir}, {"dataset", dataset}, {"trainer", trainer}};
}

std::uint64_t dataset_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "dataset"); }
std::uint64_t trainer_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "trainer"); }

TrainerConfig trainer_config(const RunConfig& cfg) {
  TrainerConfig t = cfg.trainer;
  t.seed = trainer_seed(cfg);
  return t;
}

PuDataset build_dataset(const RunConfig& cfg) {
  const auto& d = cfg.dataset;
  const std::uint64_t seed = dataset_seed(cfg);
  if (d.kind == "gaussians") {
    return make_gaussians({.n = d.n,
                           .prior = d.prior,
                           .separation = d.separation,
                           .n_labeled = d.labeled,
                           .seed = seed,
                           .standardize = d.standardize,
                           .unlabeled_cap = d.unlabeled_cap});
  }
  if (d.kind == "moons") {
    return make_two_moons({.n = d.n,
                           .noise = d.noise,
                           .n_labeled = d.labeled,
                           .seed = seed,
                           .standardize = d.standardize,
                           .unlabeled_cap = d.unlabeled_cap});
  }
  return load_csv(d.path, {.label_column = d.label_column,
                           .positive_value = d.positive_value,
                           .n_labeled = d.labeled,
                           .seed = seed,
                           .standardize = d.standardize,
                           .unlabeled_cap = d.unlabeled_cap});
}

}  // namespace pulearn
