use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{ServiceCurve, ServiceMode, DEFAULT_DEADBAND_HZ};

/// A named dynamic frequency-response product.
pub trait FrequencyService: Send + Sync {
    fn mode(&self) -> ServiceMode;

    fn default_curve(&self) -> ServiceCurve;

    fn description(&self) -> &'static str;
}

struct DynamicContainment;
struct DynamicModeration;
struct DynamicRegulation;

impl FrequencyService for DynamicContainment {
    fn mode(&self) -> ServiceMode {
        ServiceMode::DynamicContainment
    }

    fn default_curve(&self) -> ServiceCurve {
        ServiceCurve::new(DEFAULT_DEADBAND_HZ, 0.5)
    }

    fn description(&self) -> &'static str {
        "post-fault containment, full output at 0.5 Hz"
    }
}

impl FrequencyService for DynamicModeration {
    fn mode(&self) -> ServiceMode {
        ServiceMode::DynamicModeration
    }

    fn default_curve(&self) -> ServiceCurve {
        ServiceCurve::new(DEFAULT_DEADBAND_HZ, 0.2)
    }

    fn description(&self) -> &'static str {
        "buffer against sudden shifts, full output at 0.2 Hz"
    }
}

impl FrequencyService for DynamicRegulation {
    fn mode(&self) -> ServiceMode {
        ServiceMode::DynamicRegulation
    }

    fn default_curve(&self) -> ServiceCurve {
        ServiceCurve::new(DEFAULT_DEADBAND_HZ, 0.2)
    }

    fn description(&self) -> &'static str {
        "continuous regulation, full output at 0.2 Hz"
    }
}

/// Service products keyed by their short code (`DC`, `DM`, `DR`).
pub struct ServiceRegistry {
    services: BTreeMap<String, Box<dyn FrequencyService>>,
}

impl ServiceRegistry {
    pub fn empty() -> Self {
        ServiceRegistry {
            services: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, service: Box<dyn FrequencyService>) {
        self.services
            .insert(service.mode().code().to_string(), service);
    }

    /// Shared registry holding the three built-in services.
    pub fn builtin() -> &'static ServiceRegistry {
        static BUILTIN: OnceLock<ServiceRegistry> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            let mut registry = ServiceRegistry::empty();
            registry.register(Box::new(DynamicContainment));
            registry.register(Box::new(DynamicModeration));
            registry.register(Box::new(DynamicRegulation));
            registry
        })
    }

    pub fn get(&self, code: &str) -> Option<&dyn FrequencyService> {
        self.services.get(code).map(|s| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.services.keys().map(String::as_str)
    }

    pub fn default_curve(&self, mode: ServiceMode) -> ServiceCurve {
        self.get(mode.code())
            .map(|s| s.default_curve())
            .expect("built-in service registered for every mode")
    }
}
