use std::fmt;

pub const HUB_Z: f64 = 2.5;

/// The seven fixed-threshold roles over the `(z, P)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThresholdRole {
    UltraPeripheralNonHub,
    PeripheralNonHub,
    ConnectorNonHub,
    KinlessNonHub,
    ProvincialHub,
    ConnectorHub,
    KinlessHub,
}

impl ThresholdRole {
    pub const ALL: [ThresholdRole; 7] = [
        ThresholdRole::UltraPeripheralNonHub,
        ThresholdRole::PeripheralNonHub,
        ThresholdRole::ConnectorNonHub,
        ThresholdRole::KinlessNonHub,
        ThresholdRole::ProvincialHub,
        ThresholdRole::ConnectorHub,
        ThresholdRole::KinlessHub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdRole::UltraPeripheralNonHub => "ultra_peripheral_nonhub",
            ThresholdRole::PeripheralNonHub => "peripheral_nonhub",
            ThresholdRole::ConnectorNonHub => "connector_nonhub",
            ThresholdRole::KinlessNonHub => "kinless_nonhub",
            ThresholdRole::ProvincialHub => "provincial_hub",
            ThresholdRole::ConnectorHub => "connector_hub",
            ThresholdRole::KinlessHub => "kinless_hub",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn is_hub(self) -> bool {
        matches!(
            self,
            ThresholdRole::ProvincialHub | ThresholdRole::ConnectorHub | ThresholdRole::KinlessHub
        )
    }

    /// Hubs: `P <= 0.30`, `]0.30; 0.75]`, `P > 0.75`.
    /// Non-hubs: `P <= 0.05`, `]0.05; 0.62]`, `]0.62; 0.80]`, `P > 0.80`.
    pub fn classify(z: f64, p: f64) -> ThresholdRole {
        if z >= HUB_Z {
            if p <= 0.30 {
                ThresholdRole::ProvincialHub
            } else if p <= 0.75 {
                ThresholdRole::ConnectorHub
            } else {
                ThresholdRole::KinlessHub
            }
        } else if p <= 0.05 {
            ThresholdRole::UltraPeripheralNonHub
        } else if p <= 0.62 {
            ThresholdRole::PeripheralNonHub
        } else if p <= 0.80 {
            ThresholdRole::ConnectorNonHub
        } else {
            ThresholdRole::KinlessNonHub
        }
    }
}

impl fmt::Display for ThresholdRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn threshold_roles(z: &[f64], p: &[f64]) -> Vec<ThresholdRole> {
    assert_eq!(z.len(), p.len());
    z.iter().zip(p).map(|(&z, &p)| ThresholdRole::classify(z, p)).collect()
}
