// Copyright 2026 The margcert Authors
//
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

namespace margcert {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MARGCERT_DEFINE_ERROR(Name)            \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what) {} \
  }

MARGCERT_DEFINE_ERROR(NotHermitian);
MARGCERT_DEFINE_ERROR(DimensionMismatch);
MARGCERT_DEFINE_ERROR(InvalidProbabilities);
MARGCERT_DEFINE_ERROR(InvalidState);
MARGCERT_DEFINE_ERROR(InvalidObservable);
MARGCERT_DEFINE_ERROR(UnknownName);
MARGCERT_DEFINE_ERROR(SettingsMismatch);
MARGCERT_DEFINE_ERROR(SettingNotUnique);
MARGCERT_DEFINE_ERROR(NonFiniteObjective);
MARGCERT_DEFINE_ERROR(SdpFailure);
MARGCERT_DEFINE_ERROR(ParseError);

#undef MARGCERT_DEFINE_ERROR

}  // namespace margcert
