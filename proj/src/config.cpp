#include "odcsa/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace odcsa {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad(const std::string& origin, int line, const std::string& what) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(origin, line, "expected a boolean, got '" + v + "'");
}

std::vector<double> parse_scales(const std::string& v, const std::string& origin, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad(origin, line, "empty scale entry");
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      bad(origin, line, "bad scale value '" + item + "'");
    }
  }
  if (out.empty()) bad(origin, line, "scales list is empty");
  return out;
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad(origin, line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad(origin, line_no, "empty key");

    try {
      if (key == "size") {
        cfg.size = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "epochs") {
        cfg.epochs = std::stoi(value);
      } else if (key == "batch") {
        cfg.batch = std::stoi(value);
      } else if (key == "lr") {
        cfg.lr = std::stod(value);
      } else if (key == "lr_decay_every") {
        cfg.lr_decay_every = std::stoi(value);
      } else if (key == "lr_decay") {
        cfg.lr_decay = std::stod(value);
      } else if (key == "scales") {
        cfg.scales = parse_scales(value, origin, line_no);
      } else if (key == "data_dir") {
        cfg.data_dir = value;
      } else if (key == "ckpt_path") {
        cfg.ckpt_path = value;
      } else if (key == "ablation.use_odc") {
        cfg.ablation.use_odc = parse_bool(value, origin, line_no);
      } else if (key == "ablation.use_msfa") {
        cfg.ablation.use_msfa = parse_bool(value, origin, line_no);
      } else if (key == "ablation.use_era") {
        cfg.ablation.use_era = parse_bool(value, origin, line_no);
      } else if (key == "ablation.use_sra") {
        cfg.ablation.use_sra = parse_bool(value, origin, line_no);
      } else if (key == "loss.weight_amp") {
        cfg.loss_weight_amp = std::stod(value);
      } else if (key == "loss.weight_window") {
        cfg.loss_weight_window = std::stoi(value);
      } else {
        bad(origin, line_no, "unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      bad(origin, line_no, "bad value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
      bad(origin, line_no, "value '" + value + "' out of range for key '" + key + "'");
    }
  }
  if (cfg.size < 32 || cfg.size % 32 != 0) {
    throw std::runtime_error(origin + ": size must be a positive multiple of 32");
  }
  if (cfg.batch < 1 || cfg.epochs < 1) {
    throw std::runtime_error(origin + ": batch and epochs must be >= 1");
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error(path + ": cannot open config file");
  }
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string dump_config(const Config& cfg) {
  std::ostringstream os;
  auto num = [](double v) {
    std::ostringstream t;
    t << v;
    return t.str();
  };
  os << "size=" << cfg.size << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "epochs=" << cfg.epochs << "\n";
  os << "batch=" << cfg.batch << "\n";
  os << "lr=" << num(cfg.lr) << "\n";
  os << "lr_decay_every=" << cfg.lr_decay_every << "\n";
  os << "lr_decay=" << num(cfg.lr_decay) << "\n";
  os << "scales=";
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    if (i) os << ",";
    os << num(cfg.scales[i]);
  }
  os << "\n";
  os << "data_dir=" << cfg.data_dir << "\n";
  os << "ckpt_path=" << cfg.ckpt_path << "\n";
  os << "ablation.use_odc=" << (cfg.ablation.use_odc ? "true" : "false") << "\n";
  os << "ablation.use_msfa=" << (cfg.ablation.use_msfa ? "true" : "false") << "\n";
  os << "ablation.use_era=" << (cfg.ablation.use_era ? "true" : "false") << "\n";
  os << "ablation.use_sra=" << (cfg.ablation.use_sra ? "true" : "false") << "\n";
  os << "loss.weight_amp=" << num(cfg.loss_weight_amp) << "\n";
  os << "loss.weight_window=" << cfg.loss_weight_window << "\n";
  return os.str();
}

}  // namespace odcsa
