#ifndef SMP_MODEL_FILE_HPP
#define SMP_MODEL_FILE_HPP

#include <string>

#include "smp/cv.hpp"

namespace smp {

/// .smpm file: one trained model plus the transform state it was fitted
/// with, tagged by model kind.
void save_trained_model(const std::string& path, const cv::TrainedModel& model);
cv::TrainedModel load_trained_model(const std::string& path);

}  // namespace smp

#endif
