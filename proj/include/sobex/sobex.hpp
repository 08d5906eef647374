#pragma once

#include "version.hpp"
#include "errors.hpp"
#include "log.hpp"
#include "geometry.hpp"
#include "closedform.hpp"
#include "distance.hpp"
#include "plap.hpp"
#include "inflap.hpp"
#include "asymptotics.hpp"
#include "io.hpp"
