#pragma once

#include "dagq/agent.hpp"
#include "dagq/dag.hpp"
#include "dagq/enumerate.hpp"
#include "dagq/env.hpp"
#include "dagq/gradcheck.hpp"
#include "dagq/harness.hpp"
#include "dagq/isomorphism.hpp"
#include "dagq/matrix.hpp"
#include "dagq/qnet.hpp"
#include "dagq/rng.hpp"
#include "dagq/tape.hpp"
