#include "stacklab/predictor.hpp"

namespace stacklab {

LatentFeature FeatureCache::get(const ObjectSpec& spec, Orientation orientation) {
  const std::pair<int, int> key{spec.id, static_cast<int>(orientation)};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const NormalizedImage img = normalize(render_object(spec, orientation));
  std::optional<int> flag;
  if (mode_ == Mode::Nonlinear) flag = orientation == Orientation::Upright ? 0 : 1;
  return cache_.emplace(key, encode(*encoder_, img, flag)).first->second;
}

CandidatePrediction GraphPredictor::predict(const CompoundState& compound,
                                            const std::vector<LatentFeature>& features,
                                            const CandidateAction& action) {
  const LatentFeature cand = cache_.get(action.spec, action.orientation);
  return predict_candidate(*model_, compound, features, cand, action.slot);
}

CandidatePrediction BaselinePredictor::predict(const CompoundState& compound,
                                               const std::vector<LatentFeature>& features,
                                               const CandidateAction& action) {
  const int k = compound.size();
  std::vector<int> slots;
  for (const Placement& p : compound.placements) slots.push_back(p.slot);
  const LatentFeature cand = cache_.get(action.spec, action.orientation);
  const Tensor input =
      baseline_input(model_->config, features, slots, cand, action.slot);
  const Tensor out = baseline_forward(*model_, input);
  CandidatePrediction pred;
  for (int i = 0; i < k; ++i) pred.per_member.push_back(baseline_entry(out, i));
  pred.collapse_prob = baseline_e3(out, k == 0 ? 0 : k - 1);
  return pred;
}

CandidatePrediction OraclePredictor::predict(const CompoundState& compound,
                                             const std::vector<LatentFeature>& features,
                                             const CandidateAction& action) {
  (void)features;
  auto [after, outcome] = place(compound, action.spec, action.slot, action.orientation);
  const EffectRow row = effect_row(compound, after.placements.back(), after);
  CandidatePrediction pred;
  pred.per_member = row.entries;
  pred.collapse_prob = static_cast<double>(row.e3);
  return pred;
}

LatentFeature OraclePredictor::feature_of(const ObjectSpec& spec, Orientation orientation) {
  // placeholder features; the oracle never reads them
  LatentFeature f;
  f.d_min = 1.0 - spec.height;
  f.d_max = 1.0;
  f.orientation_flag = orientation == Orientation::Upright ? 0 : 1;
  return f;
}

}  // namespace stacklab
