#pragma once

#include "stacklab/graphnet.hpp"

namespace stacklab {

struct CompoundTooLarge : std::runtime_error {
  CompoundTooLarge() : std::runtime_error("compound exceeds the 14-slot pad bound") {}
};

inline constexpr int kBaselineSlots = 14;  // max object number in the dataset

// Feed-forward encoder-decoder over concatenated per-object features,
// zero-padded to 14 slots; the output packs every slot's effects slot-major
// as [e1 | e2 | e3].
struct BaselineConfig {
  Mode mode = Mode::Linear;
  int feat_dim = 6;       // per-object latent feature length
  bool slot_onehot = false;  // nonlinear: append the 3-way slot one-hot per object
  int hidden1 = 170;
  int hidden2 = 128;

  static BaselineConfig for_mode(Mode mode);
  int per_object() const { return feat_dim + (slot_onehot ? 3 : 0); }
  int input_dim() const { return per_object() * (kBaselineSlots + 1); }
  int output_dim() const { return kBaselineSlots * 7; }
};

struct BaselineModel {
  BaselineConfig config;
  Linear l1, l2, l3;

  explicit BaselineModel(const BaselineConfig& cfg);
  void init(Rng& rng);
  std::vector<Param*> all_params();
  std::size_t scalar_count();
};

// Input assembly: member features in placement order, zero padding, then the
// new object's features. Throws CompoundTooLarge when k > 14.
Tensor baseline_input(const BaselineConfig& cfg,
                      const std::vector<LatentFeature>& members,
                      const std::vector<int>& member_slots,
                      const LatentFeature& new_feat, int new_slot);

// Slot-major target: members get [e1_i, e2_i, e3], padded slots stay zero.
// The sign-loss mask zeroes e3 components (the hinge applies to e1/e2 only).
struct BaselineSample {
  Tensor input;
  Tensor target;       // 1 x 98
  Tensor sign_target;  // e3 components zeroed
  int episode = 0;
  int tower_size = 0;
};

struct BaselineSampleSet {
  std::vector<BaselineSample> train, val;
  int max_tower = 0;
};

BaselineSampleSet build_baseline_samples(const std::vector<InteractionRecord>& records,
                                         const Autoencoder& encoder, Mode mode,
                                         int val_modulus);

Tensor baseline_forward(BaselineModel& model, const Tensor& input);

// Reads one member's predicted entry out of the packed output.
EffectEntry baseline_entry(const Tensor& output, int member_index);
double baseline_e3(const Tensor& output, int member_index);

TrainLog train_baseline(BaselineModel& model, const BaselineSampleSet& samples,
                        const TrainConfig& config);

std::vector<SizeError> eval_baseline(BaselineModel& model, const BaselineSampleSet& samples);

void save_baseline(const std::string& path, BaselineModel& model,
                   const std::string& sidecar_json);
void load_baseline(const std::string& path, BaselineModel& model);

}  // namespace stacklab
