// Model hyperparameters and their key-value file form.
//
// File format: one `key = value` per line, `#` starts a comment. Keys:
//   atom_layers residue_layers decoder_layers width heads dropout
//   noise_sigma k_neighbors atom_radius atom_k_max edge_hidden
//   caconv_hidden vocab

#ifndef BINDERKIT_MODEL_CONFIG_HPP_
#define BINDERKIT_MODEL_CONFIG_HPP_

#include <sstream>
#include <string>

#include "../core/error.hpp"
#include "../core/residue_constants.hpp"
#include "../structure/builder.hpp"

namespace binderkit {

struct ModelConfig {
  int atom_layers = 2;
  int residue_layers = 3;
  int decoder_layers = 3;
  int width = 128;
  int heads = 4;
  double dropout = 0.1;
  double noise_sigma = 0.0;
  int k_neighbors = 48;
  double atom_radius = 15.0;
  int atom_k_max = 96;
  int caconv_hidden = 128;
  int vocab = kResidueVocab;

  int head_dim() const { return width / heads; }

  void validate() const {
    auto pos = [](int v, const char* what) {
      if (v <= 0)
        fail(ErrorKind::Contract, std::string("model config: ") + what + " must be positive");
    };
    pos(width, "width");
    pos(heads, "heads");
    pos(k_neighbors, "k_neighbors");
    pos(atom_k_max, "atom_k_max");
    pos(caconv_hidden, "caconv_hidden");
    pos(vocab, "vocab");
    if (atom_layers < 0 || residue_layers < 0 || decoder_layers < 0)
      fail(ErrorKind::Contract, "model config: layer counts must be non-negative");
    if (width % heads != 0)
      fail(ErrorKind::Contract, "model config: width must be divisible by heads");
    if (noise_sigma < 0)
      fail(ErrorKind::Contract, "model config: noise_sigma must be >= 0");
    if (dropout < 0 || dropout >= 1)
      fail(ErrorKind::Contract, "model config: dropout must lie in [0,1)");
    if (atom_radius <= 0)
      fail(ErrorKind::Contract, "model config: atom_radius must be positive");
    if (vocab < kNumAminoAcids + 2)
      fail(ErrorKind::Contract, "model config: vocab too small");
  }

  // Small configuration used by the toy training run and tests.
  static ModelConfig toy() {
    ModelConfig c;
    c.atom_layers = 1;
    c.residue_layers = 2;
    c.decoder_layers = 2;
    c.width = 32;
    c.heads = 4;
    c.dropout = 0.0;
    c.k_neighbors = 24;
    c.atom_radius = 10.0;
    c.atom_k_max = 32;
    c.caconv_hidden = 32;
    return c;
  }
};

inline std::string config_to_text(const ModelConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "atom_layers = " << c.atom_layers << "\n"
     << "residue_layers = " << c.residue_layers << "\n"
     << "decoder_layers = " << c.decoder_layers << "\n"
     << "width = " << c.width << "\n"
     << "heads = " << c.heads << "\n"
     << "dropout = " << c.dropout << "\n"
     << "noise_sigma = " << c.noise_sigma << "\n"
     << "k_neighbors = " << c.k_neighbors << "\n"
     << "atom_radius = " << c.atom_radius << "\n"
     << "atom_k_max = " << c.atom_k_max << "\n"
     << "caconv_hidden = " << c.caconv_hidden << "\n"
     << "vocab = " << c.vocab << "\n";
  return os.str();
}

// Applies `key = value` lines on top of `base`.
inline ModelConfig config_from_text(std::string_view text, ModelConfig base = {}) {
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos)
      line.resize(h);
    std::string_view t = detail::trim(line);
    if (t.empty())
      continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(detail::trim(t.substr(0, eq)));
    std::string_view val = detail::trim(t.substr(eq + 1));
    auto as_int = [&](int& dst) {
      if (!detail::parse_int(val, dst))
        fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": bad integer for " + key);
    };
    auto as_double = [&](double& dst) {
      if (!detail::parse_double(val, dst))
        fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": bad number for " + key);
    };
    if (key == "atom_layers") as_int(base.atom_layers);
    else if (key == "residue_layers") as_int(base.residue_layers);
    else if (key == "decoder_layers") as_int(base.decoder_layers);
    else if (key == "width") as_int(base.width);
    else if (key == "heads") as_int(base.heads);
    else if (key == "dropout") as_double(base.dropout);
    else if (key == "noise_sigma") as_double(base.noise_sigma);
    else if (key == "k_neighbors") as_int(base.k_neighbors);
    else if (key == "atom_radius") as_double(base.atom_radius);
    else if (key == "atom_k_max") as_int(base.atom_k_max);
    else if (key == "caconv_hidden") as_int(base.caconv_hidden);
    else if (key == "vocab") as_int(base.vocab);
    else
      fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  base.validate();
  return base;
}

} // namespace binderkit

#endif
