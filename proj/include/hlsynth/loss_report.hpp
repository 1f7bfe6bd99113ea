#pragma once

#include <map>
#include <string>
#include <vector>

namespace hlsynth {

struct LossReport {
  double total = 0.0;
  std::map<std::string, double> terms;
  // d(total)/d(prediction) in the prediction's flat storage order; empty when
  // the loss does not provide one.
  std::vector<double> gradient;
};

}  // namespace hlsynth
