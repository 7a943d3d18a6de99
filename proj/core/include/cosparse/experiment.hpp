#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/config.hpp"
#include "cosparse/reconstruction.hpp"
#include "cosparse/registration.hpp"
#include "cosparse/synthetic.hpp"

namespace cosparse {

/// Images are stored in [0,1] but the priors are tuned for 8-bit values; the
/// drivers below multiply by this factor before solving.
inline constexpr double kEightBitScale = 255.0;

/// Training pairs from the configured images, or from synthetic scenes with
/// seeds settings.seed + i when no images are listed.
PatchDataset training_patches(const LearnSettings& settings);

/// Extracts training pairs and learns an operator pair.
LearningResult learn_operators(const LearnSettings& settings, const LearningObserver& observer = {});

/// Blur-and-decimate measurement of a high-resolution image, as an image.
ModalImage simulate_low_resolution(const ModalImage& high, int factor);

struct SuperResolutionRun {
  ModalImage result;   // [0,1] scale, guide-sized
  ModalImage nearest;  // pixel-replication baseline
  std::vector<StageReport> stages;
};

/// Guided upsampling of `low` (the blur_downsample measurement of a
/// guide-sized image) on the 8-bit value scale.
SuperResolutionRun super_resolve(const OperatorPair& pair, const ModalImage& guide, const ModalImage& low,
                                 const ReconstructSettings& settings, const StageObserver& observer = {});

/// Problem over the image minus `settings.border` pixels on each side, with
/// both images scaled to 8-bit values.
RegistrationProblem make_registration_problem(const OperatorPair& pair, const ModalImage& fixed,
                                              const ModalImage& moving, const RegisterSettings& settings);

RegistrationOptions registration_options(const RegisterSettings& settings);

struct RegistrationRun {
  RegistrationResult result;
  RegistrationResidual residual;
  double seconds = 0.0;
};

/// Registers the synthetic pair (seed, settings.synthetic_size) whose second
/// modality was moved by rigid_transform(tx, ty, θ).
RegistrationRun register_synthetic(const OperatorPair& pair, std::uint64_t seed, ModalityPair modalities,
                                   double tx, double ty, double theta_deg, const RegisterSettings& settings,
                                   const RegistrationObserver& observer = {});

struct SweepCell {
  double translation = 0.0;  // applied to both axes
  double theta_deg = 0.0;
  RegistrationResidual residual;
  bool failed = false;  // the solver threw; `error` holds the message
  std::string error;
};

/// Grid over translation (tx = ty) and rotation in [−range, range] with the
/// given step, translation-major. Cells are independent, so `jobs` > 1 runs
/// them on worker threads without changing the results.
std::vector<SweepCell> registration_sweep(const OperatorPair& pair, std::uint64_t seed,
                                          ModalityPair modalities, const RegisterSettings& settings,
                                          int jobs = 1, double range = 10.0, double step = 2.0);

}  // namespace cosparse
