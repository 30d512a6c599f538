//! Value-based sorting policy and the per-item station transformations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bin, ComponentClass, ComponentItem, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    PlaceLowValue,
    FlipThenChill,
    SendToChill,
}

/// Low-value layers go straight to their bin; battery hosts go to the
/// chiller, a face-down iPhone case being flipped first.
pub fn decide_action(perceived: ComponentClass, orientation: Orientation) -> Result<Action> {
    use ComponentClass::*;
    Ok(match (perceived, orientation) {
        (NormalCase | Screen | Film, _) => Action::PlaceLowValue,
        (IphoneCase, Orientation::FaceDown) => Action::FlipThenChill,
        (IphoneCase, Orientation::FaceUp) | (MiddleLayer, _) => Action::SendToChill,
        (Battery | ExtractedFrame, _) => return Err(Error::NotDetectable(perceived)),
    })
}

/// Turns a face-down item face up.
pub fn flip(item: &mut ComponentItem) -> Result<()> {
    if item.orientation == Orientation::FaceUp {
        return Err(Error::Logic(format!("item {} is already face up", item.uid)));
    }
    item.orientation = Orientation::FaceUp;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RouteOutcome {
    Deposit {
        bin: Bin,
        /// A battery went into a stream not rated for it.
        hazard: bool,
        /// The audit caught a battery that would have been a hazard.
        intercepted: bool,
    },
    Chiller,
}

/// Where the robot puts an item once its action is decided.
pub fn route(item: &ComponentItem, action: Action, xray_audit: bool) -> RouteOutcome {
    match action {
        Action::PlaceLowValue if item.contains_battery && xray_audit => RouteOutcome::Deposit {
            bin: Bin::ManualException,
            hazard: false,
            intercepted: true,
        },
        Action::PlaceLowValue => RouteOutcome::Deposit {
            bin: Bin::LowValue,
            hazard: item.contains_battery,
            intercepted: false,
        },
        Action::FlipThenChill | Action::SendToChill => RouteOutcome::Chiller,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtractOutcome {
    /// Battery to the battery-safe bin, frame to the high-value bin.
    Separated { battery_lb: f64, frame_lb: f64 },
    /// Nothing to extract (misclassified item); the whole item is a frame.
    NoBattery { frame_lb: f64 },
    /// A face-down iPhone case reached the hammer; it goes to manual handling.
    Misoriented { hazard: bool },
}

pub fn extract_battery(item: &ComponentItem, chilled: bool, battery_fraction: f64) -> Result<ExtractOutcome> {
    if !chilled {
        return Err(Error::Logic(format!("item {} reached extraction unchilled", item.uid)));
    }
    if item.true_class == ComponentClass::IphoneCase && item.orientation == Orientation::FaceDown {
        return Ok(ExtractOutcome::Misoriented {
            hazard: item.contains_battery,
        });
    }
    Ok(if item.contains_battery {
        let battery_lb = item.mass_lb * battery_fraction;
        ExtractOutcome::Separated {
            battery_lb,
            frame_lb: item.mass_lb - battery_lb,
        }
    } else {
        ExtractOutcome::NoBattery { frame_lb: item.mass_lb }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComponentClass::*;

    fn item(class: ComponentClass, battery: bool) -> ComponentItem {
        ComponentItem {
            uid: 257,
            parent_phone: 256,
            true_class: class,
            perceived_class: None,
            confidence: 0.0,
            contains_battery: battery,
            orientation: Orientation::FaceDown,
            mass_fraction: 0.5,
            mass_lb: 0.2,
        }
    }

    #[test]
    fn policy_table() {
        use Orientation::*;
        assert_eq!(decide_action(Screen, FaceDown).unwrap(), Action::PlaceLowValue);
        assert_eq!(decide_action(NormalCase, FaceUp).unwrap(), Action::PlaceLowValue);
        assert_eq!(decide_action(Film, FaceDown).unwrap(), Action::PlaceLowValue);
        assert_eq!(decide_action(IphoneCase, FaceDown).unwrap(), Action::FlipThenChill);
        assert_eq!(decide_action(IphoneCase, FaceUp).unwrap(), Action::SendToChill);
        assert_eq!(decide_action(MiddleLayer, FaceDown).unwrap(), Action::SendToChill);
        assert!(decide_action(Battery, FaceDown).is_err());
    }

    #[test]
    fn flip_once() {
        let mut it = item(IphoneCase, true);
        flip(&mut it).unwrap();
        assert_eq!(it.orientation, Orientation::FaceUp);
        assert_eq!(it.true_class, IphoneCase);
        assert!(flip(&mut it).is_err());
    }

    #[test]
    fn routing() {
        let film = item(Film, false);
        assert_eq!(
            route(&film, Action::PlaceLowValue, false),
            RouteOutcome::Deposit { bin: Bin::LowValue, hazard: false, intercepted: false }
        );
        // middle layer misread as a normal case
        let ml = item(MiddleLayer, true);
        let action = decide_action(NormalCase, ml.orientation).unwrap();
        assert_eq!(
            route(&ml, action, false),
            RouteOutcome::Deposit { bin: Bin::LowValue, hazard: true, intercepted: false }
        );
        assert_eq!(
            route(&ml, action, true),
            RouteOutcome::Deposit { bin: Bin::ManualException, hazard: false, intercepted: true }
        );
        assert_eq!(route(&ml, Action::SendToChill, false), RouteOutcome::Chiller);
    }

    #[test]
    fn extraction_outcomes() {
        let ml = item(MiddleLayer, true);
        match extract_battery(&ml, true, 0.2).unwrap() {
            ExtractOutcome::Separated { battery_lb, frame_lb } => {
                assert!((battery_lb - 0.04).abs() < 1e-15);
                assert!((battery_lb + frame_lb - 0.2).abs() < 1e-15);
            }
            o => panic!("{o:?}"),
        }
        assert_eq!(
            extract_battery(&item(IphoneCase, true), true, 0.2).unwrap(),
            ExtractOutcome::Misoriented { hazard: true }
        );
        let mut up = item(IphoneCase, true);
        flip(&mut up).unwrap();
        assert!(matches!(extract_battery(&up, true, 0.2).unwrap(), ExtractOutcome::Separated { .. }));
        assert_eq!(
            extract_battery(&item(Screen, false), true, 0.2).unwrap(),
            ExtractOutcome::NoBattery { frame_lb: 0.2 }
        );
        assert!(extract_battery(&ml, false, 0.2).is_err());
    }
}
