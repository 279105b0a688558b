/**
 * Copyright 2026, the mangrove-toolkit authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MANGROVE_ERRORS_HPP
#define MANGROVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mangrove {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument value (empty input list, bad fraction, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Two rasters that must share a grid do not (shape or transform mismatch).
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Structural mismatch between datasets (band names, channel counts, ...).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A required scene or upstream artifact is missing.
class DataAvailabilityError : public Error {
public:
    using Error::Error;
};

/// Operation requires a metric CRS but the grid is georeferenced in degrees.
class UnsupportedCrsError : public Error {
public:
    using Error::Error;
};

/// Tensor shape violates a model contract (e.g. spatial divisibility).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Loss is undefined (no valid pixels to average over).
class UndefinedLossError : public Error {
public:
    using Error::Error;
};

/// Training diverged or otherwise failed; message carries epoch context.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mangrove

#endif
