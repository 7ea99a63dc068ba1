// Copyright 2026 The MAAS Graph Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace maas {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MAAS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

MAAS_DEFINE_ERROR(InvalidFrame);
MAAS_DEFINE_ERROR(InvalidWindow);
MAAS_DEFINE_ERROR(GraphError);
MAAS_DEFINE_ERROR(ShapeError);
MAAS_DEFINE_ERROR(EmptyBatch);
MAAS_DEFINE_ERROR(LabelError);
MAAS_DEFINE_ERROR(NumericsError);
MAAS_DEFINE_ERROR(ConfigError);
MAAS_DEFINE_ERROR(ParseError);
MAAS_DEFINE_ERROR(IoError);

#undef MAAS_DEFINE_ERROR

}  // namespace maas
