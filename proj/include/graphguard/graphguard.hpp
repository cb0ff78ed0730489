// Copyright 2026 the graphguard authors
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

#ifndef GRAPHGUARD_GRAPHGUARD_HPP_
#define GRAPHGUARD_GRAPHGUARD_HPP_

#include "graphguard/bytes.hpp"
#include "graphguard/discovery.hpp"
#include "graphguard/graph.hpp"
#include "graphguard/monitor.hpp"
#include "graphguard/pcap.hpp"
#include "graphguard/pki.hpp"
#include "graphguard/policy.hpp"
#include "graphguard/policy_xml.hpp"
#include "graphguard/simnet.hpp"
#include "graphguard/wire.hpp"
#include "graphguard/xml.hpp"

#endif  // GRAPHGUARD_GRAPHGUARD_HPP_
