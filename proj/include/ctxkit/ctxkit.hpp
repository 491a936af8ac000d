#pragma once

#include "ctxkit/error.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/lp.hpp"
#include "ctxkit/sdp.hpp"
#include "ctxkit/scenario.hpp"
#include "ctxkit/ontmodel.hpp"
#include "ctxkit/counterfactual.hpp"
#include "ctxkit/empirical.hpp"
#include "ctxkit/compress.hpp"
#include "ctxkit/graphinv.hpp"
#include "ctxkit/info.hpp"
#include "ctxkit/causal.hpp"
#include "ctxkit/marbleworld.hpp"
#include "ctxkit/fixtures.hpp"
#include "ctxkit/io.hpp"
#include "ctxkit/report.hpp"
