#include "footfall/model_io.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

#include "footfall/text_io.hpp"

namespace footfall {

std::string format_network(std::string_view role, const Mlp& net, const TrainedModel& meta) {
  std::string out;
  out.reserve(net.parameter_count() * 22 + 256);
  out += "FSN1 " + std::string(role) + " " + std::to_string(net.layers.size()) + "\n";
  for (const auto& l : net.layers) {
    out += "dims " + std::to_string(l.weight.cols()) + " " + std::to_string(l.weight.rows()) + "\n";
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (c > 0) out += ' ';
        out += format_double(l.weight(r, c));
      }
      out += '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r > 0) out += ' ';
      out += format_double(l.bias(r));
    }
    out += '\n';
  }
  const auto& fs = meta.robot.feasible;
  out += "gamma " + format_double(meta.gamma) + "\n";
  out += "fdist " + format_double(meta.robot.f_dist) + "\n";
  out += "bounds " + format_double(fs.dx_fwd_max) + " " + format_double(fs.dx_bwd_max) + " " +
         format_double(fs.dy_max) + " " + format_double(fs.dtheta_max) + "\n";
  out += "robot " + format_double(meta.robot.foot_length) + " " +
         format_double(meta.robot.foot_width) + "\n";
  out += "reward " + format_double(meta.reward_cfg.w1) + " " + format_double(meta.reward_cfg.w2) +
         " " + format_double(meta.reward_cfg.w3) + "\n";
  out += "tolerance " + format_double(meta.tolerance.tol_p) + " " +
         format_double(meta.tolerance.tol_theta) + " " +
         std::to_string(meta.tolerance.truncation_steps) + "\n";
  out += "leaky " + format_double(net.leaky_slope) + "\n";
  return out;
}

std::string format_model(const TrainedModel& model) {
  return format_network("actor", model.actor, model) + format_network("critic1", model.critic1, model) +
         format_network("critic2", model.critic2, model);
}

namespace {

struct Token {
  std::string_view text;
  std::size_t line;
};

class TokenStream {
 public:
  TokenStream(std::string_view text, std::string source) : source_(std::move(source)) {
    std::size_t line = 0;
    while (!text.empty()) {
      const auto eol = text.find('\n');
      std::string_view raw = text.substr(0, eol);
      text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
      ++line;
      for (auto f : split_fields(strip_comment(raw))) tokens_.push_back({f, line});
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }
  std::size_t line() const {
    if (tokens_.empty()) return 0;
    return done() ? tokens_.back().line : tokens_[pos_].line;
  }

  const Token& next(const char* expecting) {
    if (done()) throw ParseError(source_, line(), std::string("unexpected end of file, expected ") + expecting);
    return tokens_[pos_++];
  }
  void expect(std::string_view word) {
    const Token& t = next(std::string(word).c_str());
    if (t.text != word) {
      throw ParseError(source_, t.line, "expected '" + std::string(word) + "', got '" + std::string(t.text) + "'");
    }
  }
  double number() {
    const Token& t = next("a number");
    return parse_double(t.text, source_, t.line);
  }
  long long integer() {
    const Token& t = next("an integer");
    return parse_int(t.text, source_, t.line);
  }
  const std::string& source() const { return source_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_{0};
  std::string source_;
};

struct Block {
  std::string role;
  Mlp net;
  std::optional<double> gamma;
  std::optional<double> fdist;
  std::optional<FeasibleSet> bounds;
  std::optional<std::pair<double, double>> foot;
  std::optional<RewardConfig> reward;
  std::optional<ToleranceConfig> tolerance;
};

Block parse_block(TokenStream& ts) {
  Block b;
  const std::size_t header_line = ts.line();
  ts.expect("FSN1");
  b.role = std::string(ts.next("a role").text);
  if (b.role != "actor" && b.role != "critic1" && b.role != "critic2") {
    throw ParseError(ts.source(), header_line, "unknown network role '" + b.role + "'");
  }
  const long long n_layers = ts.integer();
  if (n_layers < 1 || n_layers > 64) throw ParseError(ts.source(), header_line, "invalid layer count");

  b.net.output = b.role == "actor" ? OutputActivation::Tanh : OutputActivation::Identity;
  for (long long k = 0; k < n_layers; ++k) {
    const std::size_t dims_line = ts.line();
    ts.expect("dims");
    const long long in = ts.integer();
    const long long out = ts.integer();
    if (in <= 0 || out <= 0 || in > 100000 || out > 100000) {
      throw ParseError(ts.source(), dims_line, "invalid layer dimensions");
    }
    if (k == 0) {
      b.net.dims.push_back(static_cast<int>(in));
    } else if (b.net.dims.back() != in) {
      throw ParseError(ts.source(), dims_line, "layer input size does not match previous output");
    }
    b.net.dims.push_back(static_cast<int>(out));
    Mlp::Layer layer;
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    for (long long r = 0; r < out; ++r) {
      for (long long c = 0; c < in; ++c) layer.weight(r, c) = ts.number();
    }
    for (long long r = 0; r < out; ++r) layer.bias(r) = ts.number();
    b.net.layers.push_back(std::move(layer));
  }

  while (!ts.done() && ts.peek().text != "FSN1") {
    const Token key = ts.next("a metadata key");
    if (key.text == "gamma") {
      b.gamma = ts.number();
    } else if (key.text == "fdist") {
      b.fdist = ts.number();
    } else if (key.text == "bounds") {
      FeasibleSet fs;
      fs.dx_fwd_max = ts.number();
      fs.dx_bwd_max = ts.number();
      fs.dy_max = ts.number();
      fs.dtheta_max = ts.number();
      b.bounds = fs;
    } else if (key.text == "robot") {
      const double length = ts.number();
      b.foot = {length, ts.number()};
    } else if (key.text == "reward") {
      RewardConfig r;
      r.w1 = ts.number();
      r.w2 = ts.number();
      r.w3 = ts.number();
      b.reward = r;
    } else if (key.text == "tolerance") {
      ToleranceConfig t;
      t.tol_p = ts.number();
      t.tol_theta = ts.number();
      t.truncation_steps = static_cast<int>(ts.integer());
      b.tolerance = t;
    } else if (key.text == "leaky") {
      b.net.leaky_slope = ts.number();
    } else {
      throw ParseError(ts.source(), key.line, "unknown metadata key '" + std::string(key.text) + "'");
    }
  }
  if (!b.gamma || !b.fdist || !b.bounds) {
    throw ParseError(ts.source(), header_line,
                     "network block '" + b.role + "' lacks gamma/fdist/bounds metadata");
  }
  return b;
}

}  // namespace

TrainedModel parse_model(std::string_view text, const std::string& source) {
  TokenStream ts(text, source);
  std::vector<Block> blocks;
  while (!ts.done()) blocks.push_back(parse_block(ts));
  if (blocks.size() != 3 || blocks[0].role != "actor" || blocks[1].role != "critic1" ||
      blocks[2].role != "critic2") {
    throw ParseError(source, 0, "a model file must hold actor, critic1 and critic2 blocks in order");
  }
  TrainedModel m;
  const Block& a = blocks[0];
  m.actor = a.net;
  m.critic1 = blocks[1].net;
  m.critic2 = blocks[2].net;
  m.gamma = *a.gamma;
  m.robot.f_dist = *a.fdist;
  m.robot.feasible = *a.bounds;
  if (a.foot) {
    m.robot.foot_length = a.foot->first;
    m.robot.foot_width = a.foot->second;
  }
  if (a.reward) m.reward_cfg = *a.reward;
  if (a.tolerance) m.tolerance = *a.tolerance;
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return m;
}

TrainedModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.string());
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  write_file_atomic(path, format_model(model));
}

}  // namespace footfall
