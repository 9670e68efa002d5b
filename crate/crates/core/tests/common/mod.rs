#![allow(dead_code)]

use chrono::{DateTime, TimeZone, Utc};
use hotpie_core::model::{CausalEndpoint, Classification, LifecyclePhase, NewObject, NewPath, OpContext, Project};
use hotpie_core::{PrimaryFactor, SecondaryFactor};
use serde_json::json;

pub fn at(day: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2017, 1, day, 9, 0, 0).unwrap()
}

/// Replays the aircraft functional hazard analysis session.
pub fn build_arp4761() -> Project {
    let c = OpContext::new(at(9), "fixture");
    let mut p = Project::new(
        "arp4761",
        "ARP-4761 aircraft FHA: decelerate aircraft on the ground",
        &c,
    );
    p.set_metadata("function", json!("Decelerate aircraft on the ground"), &c);
    p.set_metadata(
        "functional_failure_conditions",
        json!([
            "Loss of all deceleration capability",
            "Reduced deceleration capability",
            "Inadvertent deceleration",
            "Loss of all auto stopping features",
            "Asymmetrical Deceleration"
        ]),
        &c,
    );
    p.set_metadata(
        "environmental_and_emergency_conditions",
        json!([
            "Runway conditions (wet, icy, etc.)",
            "Runway length",
            "Tail/Cross wind",
            "Engine out",
            "Hydraulic System Loss",
            "Electrical system loss"
        ]),
        &c,
    );
    p.set_metadata(
        "applicable_phases",
        json!(["Taxi", "Takeoff to rotation", "Landing Roll", "Rejected takeoff (RTO)"]),
        &c,
    );
    p.set_metadata(
        "interfacing_functions",
        json!([
            "Air/Ground Determinations",
            "Crew Alerting (Crew warnings, alerts, messages)"
        ]),
        &c,
    );

    for (name, desc) in [
        ("aircrew", "Pilots operating the aircraft"),
        ("ground crew", "Air traffic controllers, ground logistics and runway emergency teams"),
        ("aircraft technical systems", "Wheel braking, autobrake and related systems"),
        ("runway", "Runway and its emergency management"),
        ("environment", "Weather and runway surface conditions"),
    ] {
        p.add_object(NewObject::named(name).description(desc), &c).unwrap();
    }

    let paths = [
        (
            CausalEndpoint::secondary("aircrew", SecondaryFactor::H2),
            CausalEndpoint::new("aircraft-technical-systems", PrimaryFactor::Process),
            vec!["distraction"],
            "Causal path: Distraction. Scenario: Pilot may be distracted due to bad practices during the deceleration process.",
            Classification::Definite,
        ),
        (
            CausalEndpoint::secondary("environment", SecondaryFactor::E1),
            CausalEndpoint::new("aircraft-technical-systems", PrimaryFactor::Technology),
            vec!["adverse weather", "hydroplaning"],
            "Causal path: Adverse weather - hydroplaning. Scenario: Wet runway may cause hydroplaning in the autobrake system, which may result in the autobrake sensor not detecting aircraft touchdown condition.",
            Classification::Definite,
        ),
        (
            CausalEndpoint::secondary("ground-crew", SecondaryFactor::O3),
            CausalEndpoint::new("runway", PrimaryFactor::Process),
            vec!["inadequate training"],
            "Causal path: Inadequate training for runway emergency management. Scenario: Unsure if adequate training has been provided to the ground crews (e.g. air traffic controllers, ground logistics team, ground runway emergency team) in preparation for adverse weather operation and emergency.",
            Classification::Plausible,
        ),
    ];
    for (source, target, kws, narrative, initial) in paths {
        p.add_path(
            NewPath {
                source,
                target,
                keywords: kws.into_iter().map(String::from).collect(),
                narrative: narrative.into(),
                initial,
                phase: LifecyclePhase::Design,
            },
            &c,
        )
        .unwrap();
    }
    p
}
