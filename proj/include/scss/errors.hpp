#pragma once

#include <stdexcept>
#include <string>

namespace scss {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// signal_core
class DegenerateSignal : public Error { public: using Error::Error; };
class WindowTooLarge : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class ZeroReference : public Error { public: using Error::Error; };

// distributions
class DegenerateSamples : public Error { public: using Error::Error; };
class GridMismatch : public Error { public: using Error::Error; };

// mixture
class IllConditioned : public Error { public: using Error::Error; };

// bound engine
class UnsupportedC : public Error { public: using Error::Error; };
class GridUnderflow : public Error { public: using Error::Error; };

// sepit
class ShapeMismatch : public Error { public: using Error::Error; };

// io
class UnsupportedFormat : public Error { public: using Error::Error; };
class CorruptHeader : public Error { public: using Error::Error; };
class NoSegments : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class CacheCorrupt : public Error { public: using Error::Error; };

}  // namespace scss
