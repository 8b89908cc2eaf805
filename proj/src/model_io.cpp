#include "mcdist/model_io.hpp"

#include <fstream>
#include <sstream>

#include "mcdist/dataset.hpp"

namespace mcdist {

namespace {

constexpr const char* kMagic = "mcdist-model";
constexpr const char* kVersion = "1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_vector(std::ofstream& out, const char* key, const Eigen::VectorXd& v) {
  out << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

Eigen::VectorXd read_vector(std::istringstream& in, long line) {
  Eigen::Index n = 0;
  if (!(in >> n) || n < 0) throw ParseError("bad vector length in model file", line);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(in >> v[i])) throw ParseError("truncated vector in model file", line);
  return v;
}

}  // namespace

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kMagic << " v" << kVersion << "\ntype mlr\n";
  out << "features " << model.feature_order.size();
  for (const auto& name : model.feature_order) out << ' ' << name;
  out << '\n';
  write_vector(out, "theta", model.theta);
}

void save_model(const NeuralModel& model, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kMagic << " v" << kVersion << "\ntype nnr\n";
  out << "layers " << model.inputs << ' ' << model.hidden_nodes << " 1\n";
  out << "activation "
      << (model.output_activation == OutputActivation::Tanh ? "tanh" : "linear") << '\n';
  write_vector(out, "input_min", model.input_min);
  write_vector(out, "input_max", model.input_max);
  out << "target_range " << format_double(model.target_min) << ' '
      << format_double(model.target_max) << '\n';
  write_vector(out, "theta", model.theta);
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());

  long line_no = 0;
  auto next_line = [&](std::string& key, std::istringstream& rest) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("truncated model file", line_no + 1);
    ++line_no;
    rest = std::istringstream(line);
    if (!(rest >> key)) throw ParseError("empty line in model file", line_no);
  };

  std::string key;
  std::istringstream rest;
  next_line(key, rest);
  std::string version;
  rest >> version;
  if (key != kMagic || version != std::string("v") + kVersion)
    throw ParseError("not a mcdist v1 model file", line_no);

  next_line(key, rest);
  std::string type;
  if (key != "type" || !(rest >> type)) throw ParseError("missing model type", line_no);

  if (type == "mlr") {
    LinearModel model;
    next_line(key, rest);
    std::size_t count = 0;
    if (key != "features" || !(rest >> count))
      throw ParseError("missing feature list", line_no);
    std::string name;
    while (rest >> name) model.feature_order.push_back(name);
    if (model.feature_order.size() != count)
      throw ParseError("feature count mismatch", line_no);
    next_line(key, rest);
    if (key != "theta") throw ParseError("missing theta", line_no);
    model.theta = read_vector(rest, line_no);
    return model;
  }
  if (type == "nnr") {
    NeuralModel model;
    next_line(key, rest);
    int out_nodes = 0;
    if (key != "layers" || !(rest >> model.inputs >> model.hidden_nodes >> out_nodes) ||
        out_nodes != 1)
      throw ParseError("bad layer sizes", line_no);
    next_line(key, rest);
    std::string act;
    if (key != "activation" || !(rest >> act)) throw ParseError("missing activation", line_no);
    if (act == "tanh")
      model.output_activation = OutputActivation::Tanh;
    else if (act == "linear")
      model.output_activation = OutputActivation::Linear;
    else
      throw ParseError("unknown activation '" + act + "'", line_no);
    next_line(key, rest);
    if (key != "input_min") throw ParseError("missing input_min", line_no);
    model.input_min = read_vector(rest, line_no);
    next_line(key, rest);
    if (key != "input_max") throw ParseError("missing input_max", line_no);
    model.input_max = read_vector(rest, line_no);
    next_line(key, rest);
    if (key != "target_range" || !(rest >> model.target_min >> model.target_max))
      throw ParseError("missing target_range", line_no);
    next_line(key, rest);
    if (key != "theta") throw ParseError("missing theta", line_no);
    model.theta = read_vector(rest, line_no);
    if (model.theta.size() != model.weight_count())
      throw ParseError("weight count does not match layer sizes", line_no);
    return model;
  }
  throw ParseError("unknown model type '" + type + "'", line_no);
}

}  // namespace mcdist
