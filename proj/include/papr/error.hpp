#pragma once

#include <stdexcept>
#include <string>

namespace papr {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters: non-power-of-two N, negative noise variance, bad ratios.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Configuration error tied to a named key (config file or CLI flag).
class KeyError : public ConfigError {
 public:
  KeyError(std::string key, const std::string& what)
      : ConfigError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Input for which the quantity is undefined (all-zero frame, empty sample set).
class UndefinedInputError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SideInfoError : public Error {
 public:
  using Error::Error;
};

// Malformed SYMF latent file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  FileError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace papr
