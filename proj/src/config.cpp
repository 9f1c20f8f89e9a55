#include "sdts/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sdts {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' needs an integer, got '" + value +
                                "'");
  }
}

Scalar to_scalar(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const Scalar v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' needs a number, got '" + value +
                                "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' needs an unsigned integer, got '" +
                                value + "'");
  }
}

std::string fmt_scalar(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               " is not key=value: '" + line + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "batch_size") train.batch_size = to_int(key, value);
  else if (key == "lr") train.lr = to_scalar(key, value);
  else if (key == "decay_epoch") train.decay_epoch = to_int(key, value);
  else if (key == "decay_factor") train.decay_factor = to_scalar(key, value);
  else if (key == "total_epochs") train.total_epochs = to_int(key, value);
  else if (key == "lambda2") train.lambda2 = to_scalar(key, value);
  else if (key == "patch_size") train.patch_size = to_int(key, value);
  else if (key == "seed") train.seed = to_u64(key, value);
  else if (key == "phase1_epochs") train.phase1_epochs = to_int(key, value);
  else if (key == "phase2_epochs") train.phase2_epochs = to_int(key, value);
  else if (key == "phase3_epochs") train.phase3_epochs = to_int(key, value);
  else if (key == "steps_per_epoch") train.steps_per_epoch = to_int(key, value);
  else if (key == "channels") net.channels = to_int(key, value);
  else if (key == "blocks") net.blocks = to_int(key, value);
  else if (key == "slice_split") net.slice_split = to_int(key, value);
  else if (key == "mc_channels") net.mc_channels = to_int(key, value);
  else if (key == "block_size") degrade.block_size = to_int(key, value);
  else if (key == "q_low") degrade.q_low = to_scalar(key, value);
  else if (key == "q_high") degrade.q_high = to_scalar(key, value);
  else if (key == "period") degrade.period = to_int(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void RunConfig::echo(std::ostream& out) const {
  out << "config: batch_size=" << train.batch_size << "\n";
  out << "config: lr=" << fmt_scalar(train.lr) << "\n";
  out << "config: decay_epoch=" << train.decay_epoch << "\n";
  out << "config: decay_factor=" << fmt_scalar(train.decay_factor) << "\n";
  out << "config: total_epochs=" << train.total_epochs << "\n";
  out << "config: lambda2=" << fmt_scalar(train.lambda2) << "\n";
  out << "config: patch_size=" << train.patch_size << "\n";
  out << "config: seed=" << train.seed << "\n";
  out << "config: phase1_epochs=" << train.phase1_epochs << "\n";
  out << "config: phase2_epochs=" << train.phase2_epochs << "\n";
  out << "config: phase3_epochs=" << train.phase3_epochs << "\n";
  out << "config: steps_per_epoch=" << train.steps_per_epoch << "\n";
  out << "config: channels=" << net.channels << "\n";
  out << "config: blocks=" << net.blocks << "\n";
  out << "config: slice_split=" << net.slice_split << "\n";
  out << "config: mc_channels=" << net.mc_channels << "\n";
  out << "config: block_size=" << degrade.block_size << "\n";
  out << "config: q_low=" << fmt_scalar(degrade.q_low) << "\n";
  out << "config: q_high=" << fmt_scalar(degrade.q_high) << "\n";
  out << "config: period=" << degrade.period << "\n";
}

}  // namespace sdts
