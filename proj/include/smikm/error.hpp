#pragma once

#include <stdexcept>
#include <string>

namespace smikm {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public Error { public: using Error::Error; };
class ChannelError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class DegenerateImage : public Error { public: using Error::Error; };
class EmptyResult : public Error { public: using Error::Error; };
class TooSmall : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class NotEnoughData : public Error { public: using Error::Error; };
class VocabMismatch : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class FormatVersionError : public Error { public: using Error::Error; };
class ChecksumError : public Error { public: using Error::Error; };
class LayoutError : public Error { public: using Error::Error; };
class PipelineError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace smikm
