#include "glenn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace glenn {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

// Shortest decimal form that reads back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T value{};
  is >> value;
  if (is.fail() || !(is >> std::ws).eof()) {
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  }
  return value;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {"model", "domain"}},
      {"mesh", {"n"}},
      {"run", {"mode", "kappa", "initial", "constant_value", "checkpoint", "out"}},
      {"solver", {"beta", "tol", "max_iter"}},
      {"network", {"width", "blocks", "block_kind", "activation"}},
      {"train",
       {"kappa_min", "kappa_max", "batch_size", "steps_per_epoch", "epochs", "lr_main", "lr_scaling",
        "warmup_steps", "decay", "min_lr", "final_linear_steps", "decay_rate", "weight_decay", "seed"}},
  };
  return keys;
}

}  // namespace

std::vector<double> parse_kappa_list(const std::string& text) {
  std::vector<double> kappas;
  for (const auto& item : split_list(text)) {
    const double k = parse_number<double>("kappa", item);
    if (!(k > 0.0)) throw ConfigError("kappa values must be positive, got " + item);
    kappas.push_back(k);
  }
  return kappas;
}

RunMode parse_mode(const std::string& text) {
  const std::string m = lower(trim(text));
  if (m == "solve") return RunMode::Solve;
  if (m == "train") return RunMode::Train;
  if (m == "hybrid") return RunMode::Hybrid;
  if (m == "export") return RunMode::Export;
  throw ConfigError("unknown mode '" + text + "' (expected solve, train, hybrid or export)");
}

NetArchitecture RunConfig::architecture() const {
  NetArchitecture a = network;
  a.out_dim = model == Model::Full ? 4 : 2;
  a.kappa_min = train.kappa_min;
  a.kappa_max = train.kappa_max;
  return a;
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.beta = beta;
  s.tol = tol;
  s.max_iter = max_iter;
  return s;
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_dir / "checkpoint.glenn" : checkpoint;
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> warnings;
  if (mesh_n < 1) throw ConfigError("mesh n must be >= 1");
  if (domain == Domain::LShape && mesh_n % 2 != 0) throw ConfigError("the L-shape needs an even mesh n");
  for (double k : kappas) {
    if (!(k > 0.0)) throw ConfigError("kappa values must be positive");
  }
  if (mode == RunMode::Solve || mode == RunMode::Export) {
    if (initial.empty()) throw ConfigError("[run] initial must name at least one initializer");
    for (const auto& label : initial) {
      const bool phi = label.size() == 4 && label.rfind("phi", 0) == 0 && label[3] >= '1' && label[3] <= '5';
      if (!phi && label != "constant" && label != "nn") {
        throw ConfigError("unknown initializer '" + label + "' (expected phi1..phi5, constant or nn)");
      }
    }
  }
  try {
    solver().validate();
    architecture().validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (mode == RunMode::Hybrid) {
    for (double k : kappas) {
      if (k < train.kappa_min || k > train.kappa_max) {
        warnings.push_back("kappa " + format_double(k) + " lies outside the trained range [" +
                           format_double(train.kappa_min) + ", " + format_double(train.kappa_max) + "]");
      }
    }
  }
  return warnings;
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw ConfigError(body.data().empty() ? "unknown config section [" + section + "]"
                                            : "config key outside a section: " + section);
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }

  RunConfig c;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };
  auto get_double = [&](const std::string& path, double& target) {
    if (auto v = get(path)) target = parse_number<double>(path, *v);
  };
  auto get_int = [&](const std::string& path, int& target) {
    if (auto v = get(path)) target = parse_number<int>(path, *v);
  };

  if (auto v = get("problem.model")) {
    const std::string m = lower(*v);
    if (m == "full") {
      c.model = Model::Full;
    } else if (m == "reduced") {
      c.model = Model::Reduced;
    } else {
      throw ConfigError("problem.model must be full or reduced, got '" + *v + "'");
    }
  }
  if (auto v = get("problem.domain")) {
    const std::string d = lower(*v);
    if (d == "square" || d == "unit_square") {
      c.domain = Domain::UnitSquare;
    } else if (d == "lshape" || d == "l_shape") {
      c.domain = Domain::LShape;
    } else {
      throw ConfigError("problem.domain must be square or lshape, got '" + *v + "'");
    }
  }
  get_int("mesh.n", c.mesh_n);
  if (auto v = get("run.mode")) c.mode = parse_mode(*v);
  if (auto v = get("run.kappa")) c.kappas = parse_kappa_list(*v);
  if (auto v = get("run.initial")) c.initial = split_list(*v);
  get_double("run.constant_value", c.constant_value);
  if (auto v = get("run.checkpoint")) c.checkpoint = *v;
  if (auto v = get("run.out")) c.out_dir = *v;

  get_double("solver.beta", c.beta);
  get_double("solver.tol", c.tol);
  get_int("solver.max_iter", c.max_iter);

  get_int("network.width", c.network.width);
  get_int("network.blocks", c.network.blocks);
  if (auto v = get("network.block_kind")) {
    const std::string k = lower(*v);
    if (k == "swiglu") {
      c.network.block_kind = BlockKind::SwiGLU;
    } else if (k == "daglu") {
      c.network.block_kind = BlockKind::DAGLU;
    } else {
      throw ConfigError("network.block_kind must be swiglu or daglu, got '" + *v + "'");
    }
  }
  if (auto v = get("network.activation")) {
    const std::string a = lower(*v);
    if (a == "silu") {
      c.network.activation = Activation::SiLU;
    } else if (a == "gelu") {
      c.network.activation = Activation::GELU;
    } else {
      throw ConfigError("network.activation must be silu or gelu, got '" + *v + "'");
    }
  }

  TrainConfig& t = c.train;
  get_double("train.kappa_min", t.kappa_min);
  get_double("train.kappa_max", t.kappa_max);
  get_int("train.batch_size", t.batch_size);
  get_int("train.steps_per_epoch", t.steps_per_epoch);
  get_int("train.epochs", t.epochs);
  get_double("train.lr_main", t.lr_main);
  get_double("train.lr_scaling", t.lr_scaling);
  get_int("train.warmup_steps", t.warmup_steps);
  if (auto v = get("train.decay")) {
    const std::string d = lower(*v);
    if (d == "cosine") {
      t.decay = DecayKind::Cosine;
    } else if (d == "exponential") {
      t.decay = DecayKind::Exponential;
    } else {
      throw ConfigError("train.decay must be cosine or exponential, got '" + *v + "'");
    }
  }
  get_double("train.min_lr", t.min_lr);
  get_int("train.final_linear_steps", t.final_linear_steps);
  get_double("train.decay_rate", t.decay_rate);
  get_double("train.weight_decay", t.weight_decay);
  if (auto v = get("train.seed")) t.seed = parse_number<std::uint64_t>("train.seed", *v);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string dump_defaults() {
  const RunConfig c;
  const TrainConfig& t = c.train;
  std::vector<std::string> kappas;
  for (double k : c.kappas) kappas.push_back(format_double(k));
  std::ostringstream os;
  os << "; glenn run configuration (defaults)\n"
     << "; command-line flags --kappa, --mesh-n, --out and --seed override these values\n\n"
     << "[problem]\n"
     << "; reduced (A fixed) or full (u and A)\n"
     << "model = reduced\n"
     << "; square or lshape\n"
     << "domain = square\n\n"
     << "[mesh]\n"
     << "; cells per side of the unit square (even for the L-shape)\n"
     << "n = " << c.mesh_n << "\n\n"
     << "[run]\n"
     << "; solve, train, hybrid or export (the subcommand takes precedence)\n"
     << "mode = solve\n"
     << "; comma-separated kappa values\n"
     << "kappa = " << join(kappas) << "\n"
     << "; initializers for solve/export: phi1..phi5, constant, nn\n"
     << "initial = " << join(c.initial) << "\n"
     << "; value of the constant initializer (real)\n"
     << "constant_value = " << format_double(c.constant_value) << "\n"
     << "; network checkpoint for hybrid/export (empty: <out>/checkpoint.glenn)\n"
     << "checkpoint =\n"
     << "; output directory\n"
     << "out = " << c.out_dir.string() << "\n\n"
     << "[solver]\n"
     << "; metric stabilization\n"
     << "beta = " << format_double(c.beta) << "\n"
     << "; stop once the energy decrease of one iteration is below tol (1e-8 for a fast run)\n"
     << "tol = " << format_double(c.tol) << "\n"
     << "max_iter = " << c.max_iter << "\n\n"
     << "[network]\n"
     << "width = " << c.network.width << "\n"
     << "blocks = " << c.network.blocks << "\n"
     << "; swiglu or daglu\n"
     << "block_kind = swiglu\n"
     << "; silu or gelu\n"
     << "activation = silu\n\n"
     << "[train]\n"
     << "; sampled kappa range, also used to rescale the kappa input\n"
     << "kappa_min = " << format_double(t.kappa_min) << "\n"
     << "kappa_max = " << format_double(t.kappa_max) << "\n"
     << "batch_size = " << t.batch_size << "\n"
     << "steps_per_epoch = " << t.steps_per_epoch << "\n"
     << "epochs = " << t.epochs << "\n"
     << "; target learning rates of the weights and of the residual scaling vectors\n"
     << "lr_main = " << format_double(t.lr_main) << "\n"
     << "lr_scaling = " << format_double(t.lr_scaling) << "\n"
     << "warmup_steps = " << t.warmup_steps << "\n"
     << "; cosine (to min_lr, then final_linear_steps to 0) or exponential (decay_rate per epoch)\n"
     << "decay = cosine\n"
     << "min_lr = " << format_double(t.min_lr) << "\n"
     << "final_linear_steps = " << t.final_linear_steps << "\n"
     << "decay_rate = " << format_double(t.decay_rate) << "\n"
     << "weight_decay = " << format_double(t.weight_decay) << "\n"
     << "; seeds both the initial weights and the per-epoch sampling\n"
     << "seed = " << t.seed << "\n";
  return os.str();
}

}  // namespace glenn
