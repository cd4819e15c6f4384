#pragma once

#include "silence/core.hpp"
#include "silence/failure.hpp"
#include "silence/local_state.hpp"
#include "silence/protocol.hpp"
#include "silence/protocols.hpp"
#include "silence/run.hpp"
#include "silence/kernel.hpp"
#include "silence/enumerator.hpp"
#include "silence/analysis.hpp"
#include "silence/fact.hpp"
#include "silence/knowledge.hpp"
#include "silence/trace_json.hpp"
#include "silence/diagram.hpp"
