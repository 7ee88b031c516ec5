#pragma once

#include "topodyn/certificates.hpp"
#include "topodyn/config.hpp"
#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/limits.hpp"
#include "topodyn/runner.hpp"
#include "topodyn/sampler.hpp"
#include "topodyn/schema.hpp"
#include "topodyn/serialize.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/span.hpp"
#include "topodyn/systems.hpp"
#include "topodyn/version.hpp"
