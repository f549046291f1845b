#pragma once

#include <stdexcept>
#include <string>

namespace rcids {

// Every failure the toolkit reports deliberately. The CLI maps these to
// stable process exit codes (see exit_code) so scripts can branch on the
// category instead of parsing stderr.
enum class ErrorCode {
  OutOfRange,         // physical value does not fit the signal's raw width
  TruncatedFrame,     // signal window extends past the frame's dlc bytes
  MalformedLine,      // text log line does not parse
  BadDlc,             // payload longer than 8 bytes
  ShapeMismatch,      // tensor/layer shape disagreement
  ImageTooSmall,      // source image below the network input size
  CheckpointMismatch, // checkpoint topology does not fit the requested model
  CheckpointCorrupt,  // bad magic, bad version, or truncated checkpoint file
  SensorOutOfRange,   // sensor reading outside its configured range
  DimensionMismatch,  // context/window vector length disagrees with params
  SingleClassDataset, // training set lacks one of the two labels
  EmptyDataset,       // injector or trainer given nothing to work on
  MissingImage,       // dataset references an image file that is not present
  MisalignedFrames,   // CAN windows do not line up with image timestamps
  SchemaError,        // CSV missing required columns or holding bad values
  TooFewRecords,      // not enough records to split
  SequenceTooShort,   // angle sequence shorter than the predictor window
  LengthMismatch,     // verdicts and ground truth differ in length
  IoFailure,          // filesystem problem
  ConfigError,        // unusable configuration value or file
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::TruncatedFrame: return "TRUNCATED_FRAME";
    case ErrorCode::MalformedLine: return "MALFORMED_LINE";
    case ErrorCode::BadDlc: return "BAD_DLC";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::ImageTooSmall: return "IMAGE_TOO_SMALL";
    case ErrorCode::CheckpointMismatch: return "CHECKPOINT_MISMATCH";
    case ErrorCode::CheckpointCorrupt: return "CHECKPOINT_CORRUPT";
    case ErrorCode::SensorOutOfRange: return "SENSOR_OUT_OF_RANGE";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::SingleClassDataset: return "SINGLE_CLASS_DATASET";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::MissingImage: return "MISSING_IMAGE";
    case ErrorCode::MisalignedFrames: return "MISALIGNED_FRAMES";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::TooFewRecords: return "TOO_FEW_RECORDS";
    case ErrorCode::SequenceTooShort: return "SEQUENCE_TOO_SHORT";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

// Exit codes: 0 success, 2 usage error, then one code per category from 10.
inline int exit_code(ErrorCode c) { return 10 + static_cast<int>(c); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rcids
