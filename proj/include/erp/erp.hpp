#pragma once

#include "erp/core/errors.hpp"
#include "erp/core/format.hpp"
#include "erp/core/rng.hpp"
#include "erp/engine/bisection.hpp"
#include "erp/engine/pipeline.hpp"
#include "erp/engine/train.hpp"
#include "erp/hedging/features.hpp"
#include "erp/hedging/instruments.hpp"
#include "erp/hedging/rollout.hpp"
#include "erp/hedging/statistics.hpp"
#include "erp/models/io.hpp"
#include "erp/models/params.hpp"
#include "erp/models/path_batch.hpp"
#include "erp/models/simulate.hpp"
#include "erp/neural/adam.hpp"
#include "erp/neural/checkpoint.hpp"
#include "erp/neural/grad_loss.hpp"
#include "erp/neural/network.hpp"
#include "erp/pricing/black_scholes.hpp"
#include "erp/pricing/risk_neutral.hpp"
#include "erp/risk/measures.hpp"
