// Copyright 2026 The crag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header for the full engine.

#include "crag/audit.hpp"
#include "crag/client.hpp"
#include "crag/common.hpp"
#include "crag/crypto.hpp"
#include "crag/embedding.hpp"
#include "crag/enclave.hpp"
#include "crag/gateway.hpp"
#include "crag/governance.hpp"
#include "crag/rag.hpp"
#include "crag/records.hpp"
#include "crag/redaction.hpp"
#include "crag/registry.hpp"
#include "crag/vector_store.hpp"
