// Copyright 2026 The pvlstm Authors
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


#ifndef PVLSTM__CLI__CLI_HPP_
#define PVLSTM__CLI__CLI_HPP_

#include <ostream>

namespace pvlstm::cli
{

/**
 * @brief Entry point of the `pvlstm` tool.
 *
 * Subcommands: gen, train, eval, predict, report. Global flags: --seed,
 * --config, --out, --quiet. Returns the process exit code: 0 on success,
 * 1 on a runtime or data error, CLI11's code on a usage error.
 */
int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace pvlstm::cli

#endif  // PVLSTM__CLI__CLI_HPP_
