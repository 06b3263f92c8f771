#pragma once

#include "rdsp/campaign.hpp"
#include "rdsp/core.hpp"
#include "rdsp/engine.hpp"
#include "rdsp/geo.hpp"
#include "rdsp/metrics.hpp"
#include "rdsp/protocol_rdsp.hpp"
#include "rdsp/protocol_uf.hpp"
#include "rdsp/scenario.hpp"
#include "rdsp/trace.hpp"
