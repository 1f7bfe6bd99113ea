#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlsynth/config.hpp"

namespace hlsynth {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity (error, violation count, ...)
  double threshold = 0.0;  // what `value` was compared against
  std::string detail;
};

struct SelfcheckOptions {
  std::uint64_t seed = 0;
  int oracle_triples = 1000;
  int fd_instances = 20;
  int batch_samples = 50;
};

/// Renderer vs the scalar oracle on random (scene, params, pixel) triples.
CheckResult check_oracle_agreement(const SelfcheckOptions& opt);
CheckResult check_fresnel_fixed_points();
/// Gradient checks; value is the worst relative error over all instances.
CheckResult check_fd_highlight(const SelfcheckOptions& opt);
CheckResult check_fd_seam(const SelfcheckOptions& opt);
CheckResult check_fd_spec(const SelfcheckOptions& opt);
CheckResult check_fd_reconstruction(const SelfcheckOptions& opt);
CheckResult check_fd_inpainting(const SelfcheckOptions& opt);
/// Composite recomputation and mask identities over a generated batch;
/// value is the violation count.
CheckResult check_composite_batch(const SelfcheckOptions& opt);
CheckResult check_mask_algebra(const SelfcheckOptions& opt);
CheckResult check_render_determinism(const SelfcheckOptions& opt);
CheckResult check_token_pipeline(const SelfcheckOptions& opt);

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opt);

/// {"passed": bool, "checks": [...]}.
Json to_json(const std::vector<CheckResult>& results);

}  // namespace hlsynth
