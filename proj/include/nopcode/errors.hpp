#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nopcode {

// Base for everything this library throws. The CLI maps subclasses of
// InputError to exit code 2 and anything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, unknown mnemonics, invalid arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public InputError {
 public:
  explicit IoError(const std::string& path, const std::string& what)
      : InputError("io error: " + path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UnknownMnemonicError : public InputError {
 public:
  UnknownMnemonicError(std::string file, std::size_t line, std::string token)
      : InputError("unknown mnemonic '" + token + "' at " +
                   (file.empty() ? "<input>" : file) + ":" + std::to_string(line)),
        file_(std::move(file)),
        line_(line),
        token_(std::move(token)) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& token() const { return token_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string token_;
};

class FormatError : public InputError {
 public:
  FormatError(std::size_t line_no, const std::string& reason)
      : InputError("format error at line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class DuplicateAppIdError : public InputError {
 public:
  explicit DuplicateAppIdError(const std::string& app_id)
      : InputError("duplicate app id: " + app_id) {}
};

class MixedNError : public InputError {
 public:
  MixedNError(int a, int b)
      : InputError("mixed gram lengths: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class InvalidDistributionError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyTableError : public InputError {
 public:
  EmptyTableError() : InputError("contingency table has no samples") {}
};

class DuplicateFeatureError : public InputError {
 public:
  explicit DuplicateFeatureError(std::uint32_t index)
      : InputError("duplicate feature index in ranking merge: " + std::to_string(index)) {}
};

class KTooLargeError : public InputError {
 public:
  KTooLargeError(int k, std::size_t rows)
      : InputError("k=" + std::to_string(k) + " exceeds sample count " + std::to_string(rows)) {}
};

class EmptyDatasetError : public InputError {
 public:
  EmptyDatasetError() : InputError("dataset has no rows") {}
};

class SingleClassError : public InputError {
 public:
  SingleClassError() : InputError("training requires at least two classes") {}
};

class DimensionMismatchError : public InputError {
 public:
  DimensionMismatchError(std::size_t index, std::size_t vocab_size)
      : InputError("feature index " + std::to_string(index) +
                   " out of range for vocabulary of size " + std::to_string(vocab_size)) {}
};

class ModeMismatchError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyMatrixError : public InputError {
 public:
  EmptyMatrixError() : InputError("confusion matrix has no samples") {}
};

}  // namespace nopcode
