#pragma once

#include "colearn/data.hpp"

#include <string>
#include <vector>

namespace colearn {

// PAMAP2: whitespace-separated .dat, one subject per file, one sample per
// line. Line layout: timestamp(s), activity id, heart rate, then 3 IMUs
// (hand, chest, ankle) of 17 columns each: temperature, 3x acc (16g),
// 3x acc (6g), 3x gyro, 3x magnetometer, 4x orientation. Missing values
// appear as the token "NaN". 100 Hz.
namespace pamap2 {

// The 36 motion columns: both accelerometer ranges, gyroscope and
// magnetometer of every IMU. Orientation estimates, temperatures and heart
// rate are excluded. Reviewed against the dataset README; treat as config.
std::vector<int> default_columns();

// The 12 protocol activities used for classification. 0 (transient) and
// the optional activities are excluded.
std::vector<int> default_activities();

const std::vector<std::pair<int, std::string>>& activity_names();

inline constexpr double kSampleRateHz = 100.0;

}  // namespace pamap2

// HARTH: per-subject CSV with a header row naming at least
// timestamp,back_x,back_y,back_z,thigh_x,thigh_y,thigh_z,label.
// Two 3-axial accelerometers (lower back, right thigh), 50 Hz.
namespace harth {

std::vector<std::string> feature_columns();

// The 5 locomotion activities: walking, running, standing, sitting, lying.
std::vector<int> default_activities();

const std::vector<std::pair<int, std::string>>& activity_names();

inline constexpr double kSampleRateHz = 50.0;

}  // namespace harth

// Load selected columns of the listed subjects. subject_ids are file stems
// (e.g. "subject101" -> <dir>/subject101.dat). Rows whose activity id is
// not whitelisted are dropped; missing values pass through as NaN for
// clean() to resolve.
std::vector<SubjectSeries> load_pamap2(const std::string& directory, const std::vector<std::string>& subject_ids,
                                       const std::vector<int>& column_selection,
                                       const std::vector<int>& activity_whitelist);

// Load the six acceleration channels of the listed subjects
// (e.g. "S006" -> <dir>/S006.csv).
std::vector<SubjectSeries> load_harth(const std::string& directory, const std::vector<std::string>& subject_ids,
                                      const std::vector<int>& activity_whitelist);

}  // namespace colearn
