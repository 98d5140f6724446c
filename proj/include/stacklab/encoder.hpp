#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stacklab/nn.hpp"
#include "stacklab/renderer.hpp"

namespace stacklab {

// Object feature vector: learned 4-d code plus the depth range that the
// normalization removed; Nonlinear mode appends the orientation flag.
// Assembly order [z0..z3, d_min, d_max, (flag)] is fixed.
struct LatentFeature {
  std::array<double, 4> z{};
  double d_min = 0;
  double d_max = 0;
  std::optional<int> orientation_flag;

  std::vector<double> assemble() const {
    std::vector<double> out{z[0], z[1], z[2], z[3], d_min, d_max};
    if (orientation_flag) out.push_back(static_cast<double>(*orientation_flag));
    return out;
  }
};

// Encoder 1024-256-256-64-4 with a mirrored decoder; the decoder exists only
// for reconstruction training and is dropped from snapshots.
struct Autoencoder {
  Linear e1{"enc1", kImagePixels, 256};
  Linear e2{"enc2", 256, 256};
  Linear e3{"enc3", 256, 64};
  Linear e4{"enc4", 64, 4};
  Linear d1{"dec1", 4, 64};
  Linear d2{"dec2", 64, 256};
  Linear d3{"dec3", 256, 256};
  Linear d4{"dec4", 256, kImagePixels};

  void init(Rng& rng);
  int encode_node(Tape& tape, int x);  // 1x4 latent
  int decode_node(Tape& tape, int z);  // 1x1024 sigmoid reconstruction

  std::vector<Linear*> encoder_layers() { return {&e1, &e2, &e3, &e4}; }
  std::vector<Linear*> decoder_layers() { return {&d1, &d2, &d3, &d4}; }
  std::vector<Param*> all_params();
  std::vector<Param*> encoder_params();
};

struct EncoderTrainConfig {
  std::uint64_t seed = 42;
  long max_epochs = 400;       // cap for the convergence rule
  int plateau_epochs = 50;     // stop when val MSE improves < delta this long
  double plateau_delta = 1e-6;
  double lr = 1e-4;
  double gamma = 0.95;
  int lr_step = 500;
  bool lr_per_optimizer_step = false;  // default: scheduler steps per epoch
};

struct EncoderTrainResult {
  long epochs = 0;
  double final_train_mse = 0;
  double final_val_mse = 0;
  std::vector<std::array<double, 3>> log;  // epoch, train mse, val mse
};

// Train on the given images; `val` may be empty (plateau then uses train MSE).
EncoderTrainResult train_autoencoder(Autoencoder& model,
                                     const std::vector<NormalizedImage>& train,
                                     const std::vector<NormalizedImage>& val,
                                     const EncoderTrainConfig& config);

// Standard training corpus: every catalog object in both orientations with
// sub-pixel jitters (jitter 0 is the unshifted render).
struct EncoderCorpus {
  std::vector<NormalizedImage> train;
  std::vector<NormalizedImage> val;  // one jitter per (object, orientation)
};
EncoderCorpus encoder_corpus(std::uint64_t seed, int jitters_per_object = 8);

LatentFeature encode(const Autoencoder& model, const NormalizedImage& img,
                     std::optional<int> orientation_flag = std::nullopt);

void save_encoder(const std::string& path, Autoencoder& model,
                  const std::string& sidecar_json);
void load_encoder(const std::string& path, Autoencoder& model);

}  // namespace stacklab
