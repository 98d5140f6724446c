#pragma once

#include <map>
#include <memory>

#include "stacklab/baseline.hpp"
#include "stacklab/graphnet.hpp"

namespace stacklab {

struct CandidateAction {
  ObjectSpec spec;
  int slot = 1;
  Orientation orientation = Orientation::Upright;
};

// Effect predictions for placing a candidate on a compound. Implementations:
// the trained graph model, the feed-forward baseline, and the simulator
// oracle (ground truth, used to isolate planner correctness from model error).
class EffectPredictor {
 public:
  virtual ~EffectPredictor() = default;
  virtual CandidatePrediction predict(const CompoundState& compound,
                                      const std::vector<LatentFeature>& features,
                                      const CandidateAction& action) = 0;
  virtual LatentFeature feature_of(const ObjectSpec& spec, Orientation orientation) = 0;
  virtual const char* name() const = 0;
};

// Renders and encodes object views once, then reuses them.
class FeatureCache {
 public:
  explicit FeatureCache(const Autoencoder* encoder, Mode mode)
      : encoder_(encoder), mode_(mode) {}
  LatentFeature get(const ObjectSpec& spec, Orientation orientation);

 private:
  const Autoencoder* encoder_;
  Mode mode_;
  std::map<std::pair<int, int>, LatentFeature> cache_;
};

class GraphPredictor : public EffectPredictor {
 public:
  GraphPredictor(GraphModel* model, const Autoencoder* encoder)
      : model_(model), cache_(encoder, model->config.mode) {}
  CandidatePrediction predict(const CompoundState& compound,
                              const std::vector<LatentFeature>& features,
                              const CandidateAction& action) override;
  LatentFeature feature_of(const ObjectSpec& spec, Orientation orientation) override {
    return cache_.get(spec, orientation);
  }
  const char* name() const override { return "mogan"; }

 private:
  GraphModel* model_;
  FeatureCache cache_;
};

class BaselinePredictor : public EffectPredictor {
 public:
  BaselinePredictor(BaselineModel* model, const Autoencoder* encoder)
      : model_(model), cache_(encoder, model->config.mode) {}
  CandidatePrediction predict(const CompoundState& compound,
                              const std::vector<LatentFeature>& features,
                              const CandidateAction& action) override;
  LatentFeature feature_of(const ObjectSpec& spec, Orientation orientation) override {
    return cache_.get(spec, orientation);
  }
  const char* name() const override { return "baseline"; }

 private:
  BaselineModel* model_;
  FeatureCache cache_;
};

// Ground-truth predictor: settles the candidate in the simulator and reads
// the effect oracle. Features are ignored.
class OraclePredictor : public EffectPredictor {
 public:
  CandidatePrediction predict(const CompoundState& compound,
                              const std::vector<LatentFeature>& features,
                              const CandidateAction& action) override;
  LatentFeature feature_of(const ObjectSpec& spec, Orientation orientation) override;
  const char* name() const override { return "oracle"; }
};

}  // namespace stacklab
