#pragma once

#include <cstdint>
#include <string>

#include "dsgrl/augment.hpp"
#include "dsgrl/encoder.hpp"
#include "dsgrl/objective.hpp"
#include "dsgrl/optimizer.hpp"

namespace dsgrl {

// Everything a training job needs besides the data. Serialized as the
// checkpoint's JSON header; the CLI embeds the same sections in its job file.
struct TrainConfig {
  Mode mode = Mode::Feature;

  // Widths. Zero means "derive the default": encoder_hidden -> 2*d,
  // aug_hidden -> d1.
  index_t d1 = 128;             // augmentation output width
  index_t d = 64;               // encoder output width (embedding is 2d)
  index_t encoder_hidden = 0;
  index_t aug_hidden = 0;

  // Depths.
  index_t encoder_layers = 2;
  index_t feature_aug_layers = 1;
  index_t topo_layers = 2;

  LossWeights weights;
  LatentReg latent_reg = LatentReg::Vic;
  InvarianceForm invariance_form = InvarianceForm::Frobenius;

  AdamConfig adam;

  index_t epochs = 200;
  std::uint64_t seed = 1;
  index_t batch = 0;  // 0 = full batch; otherwise rows sampled per epoch
  bool untrained = false;         // keep seeded init, skip optimization
  index_t aprime_refresh = 1;     // rebuild the high-order network every k epochs
  ReadoutMode readout = ReadoutMode::Mean;

  index_t encoder_hidden_width() const { return encoder_hidden > 0 ? encoder_hidden : 2 * d; }
  index_t aug_hidden_width() const { return aug_hidden > 0 ? aug_hidden : d1; }

  // Throws a config error when any field is out of its documented range.
  void validate() const;
};

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

// JSON round-trip. Unknown keys are rejected.
std::string train_config_to_json(const TrainConfig& cfg, int indent = -1);
TrainConfig train_config_from_json(const std::string& json_text);

}  // namespace dsgrl
