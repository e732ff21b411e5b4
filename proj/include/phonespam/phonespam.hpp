#pragma once

#include "phonespam/cluster.hpp"
#include "phonespam/common.hpp"
#include "phonespam/identity.hpp"
#include "phonespam/ingest.hpp"
#include "phonespam/labeler.hpp"
#include "phonespam/metrics.hpp"
#include "phonespam/model.hpp"
#include "phonespam/phone.hpp"
#include "phonespam/pipeline.hpp"
#include "phonespam/service.hpp"
#include "phonespam/synth.hpp"
#include "phonespam/text.hpp"
#include "phonespam/url.hpp"
