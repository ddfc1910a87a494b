// Copyright 2026 The kgdsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace kgdsel {

/// Peak resident set size of this process in MiB (VmHWM), or 0 when the
/// platform does not expose it. Process-wide, so approximate per task.
double peak_memory_mb();

/// Resets the peak RSS counter where supported. Returns false otherwise.
bool reset_peak_memory();

}  // namespace kgdsel
