#pragma once

#include "roma/canonical_json.hpp"
#include "roma/chain_backend.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"
#include "roma/fixtures.hpp"
#include "roma/imi.hpp"
#include "roma/ledger.hpp"
#include "roma/matching.hpp"
#include "roma/memo.hpp"
#include "roma/observations.hpp"
#include "roma/personality.hpp"
#include "roma/remote_chain.hpp"
#include "roma/roles.hpp"
#include "roma/rounds.hpp"
#include "roma/session.hpp"
#include "roma/stats/analysis.hpp"
#include "roma/stats/distributions.hpp"
#include "roma/stats/hypothesis_tests.hpp"
#include "roma/time.hpp"
