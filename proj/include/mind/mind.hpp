#pragma once

#include "mind/backend.hpp"
#include "mind/commands.hpp"
#include "mind/config.hpp"
#include "mind/debate.hpp"
#include "mind/domain.hpp"
#include "mind/error.hpp"
#include "mind/evaluation.hpp"
#include "mind/http_backend.hpp"
#include "mind/insight.hpp"
#include "mind/mock_backend.hpp"
#include "mind/pipeline.hpp"
#include "mind/prompts.hpp"
#include "mind/response_cache.hpp"
#include "mind/retrieval.hpp"
#include "mind/retrieval_io.hpp"
#include "mind/transcript_io.hpp"
