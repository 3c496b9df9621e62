//! Drone delivery services, customer requests and composition plans.
//!
//! Every skyway segment is a service; a plan chains services from the
//! request source to its destination. Drone allocation is out of scope: one
//! default drone serves every request.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkywayError};
use crate::network::{DroneProfile, NetworkView, NodeIx, Point, SkywayNetwork};
use crate::pathfind::{dijkstra, Path};
use crate::reactive::{
    cell_density_recompose, global_recompose, radius_recompose, splice_plan, two_phased_recompose,
    RecompositionResult, Strategy, TwoPhaseOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneDeliveryService {
    pub service_id: u64,
    pub drone: String,
    pub start_location: NodeIx,
    pub end_location: NodeIx,
    pub start_time: f64,
    pub end_time: f64,
    /// At least `length`, `cost`, `battery` and `flight_time`.
    pub qos: BTreeMap<String, f64>,
}

impl DroneDeliveryService {
    pub fn length(&self) -> f64 {
        self.qos.get("length").copied().unwrap_or(0.0)
    }

    pub fn connects(&self, u: NodeIx, v: NodeIx) -> bool {
        (self.start_location, self.end_location) == (u, v) || (self.start_location, self.end_location) == (v, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CustomerDeliveryRequest {
    pub source: NodeIx,
    pub destination: NodeIx,
    pub start_time: f64,
    pub package_weight: f64,
}

impl CustomerDeliveryRequest {
    pub fn validate(&self) -> Result<()> {
        if self.source == self.destination {
            return Err(SkywayError::Precondition("source equals destination".into()));
        }
        if !(self.package_weight > 0.0) {
            return Err(SkywayError::Precondition("package weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub request: CustomerDeliveryRequest,
    pub services: Vec<DroneDeliveryService>,
    pub total_length: f64,
    /// Cruise speed used to schedule the services, length per time unit.
    pub speed: f64,
}

impl CompositionPlan {
    /// Node sequence walked by the plan.
    pub fn walk(&self) -> Vec<NodeIx> {
        let mut out = Vec::with_capacity(self.services.len() + 1);
        if let Some(first) = self.services.first() {
            out.push(first.start_location);
        }
        out.extend(self.services.iter().map(|s| s.end_location));
        out
    }

    /// Position of the service flying segment `u`-`v` (either direction).
    pub fn segment_position(&self, u: NodeIx, v: NodeIx) -> Option<usize> {
        self.services.iter().position(|s| s.connects(u, v))
    }

    /// Chaining, endpoints and time ordering.
    pub fn validate(&self) -> Result<()> {
        let first = self.services.first().ok_or_else(|| SkywayError::Mismatch("plan has no services".into()))?;
        let last = self.services.last().expect("non-empty");
        if first.start_location != self.request.source || last.end_location != self.request.destination {
            return Err(SkywayError::Mismatch("plan does not join source to destination".into()));
        }
        for w in self.services.windows(2) {
            if w[0].end_location != w[1].start_location {
                return Err(SkywayError::Mismatch(format!(
                    "service {} ends at {} but service {} starts at {}",
                    w[0].service_id, w[0].end_location, w[1].service_id, w[1].start_location
                )));
            }
            if w[1].start_time < w[0].end_time {
                return Err(SkywayError::Mismatch("service times overlap".into()));
            }
        }
        if self.services.iter().any(|s| s.end_time < s.start_time) {
            return Err(SkywayError::Mismatch("service ends before it starts".into()));
        }
        Ok(())
    }
}

/// Services for each hop of `path`, flown back to back from `start_time`.
pub(crate) fn services_along<V: NetworkView>(
    view: &V,
    path: &Path,
    drone: &str,
    first_id: u64,
    start_time: f64,
    speed: f64,
) -> Vec<DroneDeliveryService> {
    let mut t = start_time;
    path.segments()
        .zip(first_id..)
        .map(|((u, v), id)| {
            let e = view
                .neighbors(u)
                .find(|&(w, _)| w == v)
                .map(|(_, e)| *e)
                .expect("path hops are view edges");
            let flight_time = e.length / speed;
            let qos = BTreeMap::from([
                ("length".to_string(), e.length),
                ("cost".to_string(), e.cost),
                ("battery".to_string(), e.battery),
                ("flight_time".to_string(), flight_time),
            ]);
            let s = DroneDeliveryService {
                service_id: id,
                drone: drone.to_string(),
                start_location: u,
                end_location: v,
                start_time: t,
                end_time: t + flight_time,
                qos,
            };
            t += flight_time;
            s
        })
        .collect()
}

/// Plan along the global shortest path from source to destination.
pub fn compose_initial(net: &SkywayNetwork, request: CustomerDeliveryRequest, speed: f64) -> Result<CompositionPlan> {
    request.validate()?;
    if !(speed > 0.0) {
        return Err(SkywayError::InvalidParams("speed must be positive".into()));
    }
    let (path, _) = dijkstra(net, request.source, request.destination, None)?.ok_or(SkywayError::Unreachable {
        from: request.source,
        to: request.destination,
    })?;
    let drone = DroneProfile::default();
    let services = services_along(net, &path, &drone.id, 0, request.start_time, speed);
    Ok(CompositionPlan {
        request,
        services,
        total_length: path.total_length,
        speed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureType {
    Environmental,
    Operational,
    Navigational,
    Regulatory,
    Infrastructure,
    ServiceLevel,
}

/// A service deviation; always reduced to the loss of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureEvent {
    pub failure_type: FailureType,
    pub failed_service: u64,
    pub location: Point,
    pub timestamp: f64,
    pub failed_edge: (NodeIx, NodeIx),
}

impl FailureEvent {
    /// Infrastructure failure of the plan's service over `u`-`v`, reported at
    /// the segment's start node and start time.
    pub fn segment_outage(net: &SkywayNetwork, plan: &CompositionPlan, u: NodeIx, v: NodeIx) -> Result<Self> {
        let k = plan
            .segment_position(u, v)
            .ok_or_else(|| SkywayError::Mismatch(format!("segment {u}-{v} is not part of the plan")))?;
        let s = &plan.services[k];
        Ok(Self {
            failure_type: FailureType::Infrastructure,
            failed_service: s.service_id,
            location: net.point(s.start_location),
            timestamp: s.start_time,
            failed_edge: (s.start_location, s.end_location),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecomposeParams {
    /// Cell edge for the density grid; defaults to `cell_size_frac * network_size`.
    pub cell_size: Option<f64>,
    pub cell_size_frac: f64,
    pub two_phase: TwoPhaseOptions,
}

impl Default for RecomposeParams {
    fn default() -> Self {
        Self {
            cell_size: None,
            cell_size_frac: crate::reactive::DEFAULT_CELL_SIZE_FRAC,
            two_phase: TwoPhaseOptions::default(),
        }
    }
}

impl RecomposeParams {
    pub fn cell_size_for(&self, net: &SkywayNetwork) -> f64 {
        self.cell_size.unwrap_or(self.cell_size_frac * net.network_size())
    }
}

/// Runs one strategy on a view for the failed segment `a`-`b`.
pub fn recompose<V: NetworkView>(
    view: &V,
    a: NodeIx,
    b: NodeIx,
    strategy: Strategy,
    params: &RecomposeParams,
) -> Result<RecompositionResult> {
    match strategy {
        Strategy::Radius => radius_recompose(view, a, b),
        Strategy::CellDensity => cell_density_recompose(view, a, b, params.cell_size_for(view.network())),
        Strategy::TwoPhased => two_phased_recompose(view, a, b, params.two_phase),
        Strategy::Global => global_recompose(view, a, b),
    }
}

/// Reroutes `plan` around a failed segment.
///
/// Local strategies reconnect the segment's endpoints and splice the detour
/// into the plan; [`Strategy::Global`] replans from the segment's start node
/// to the destination.
pub fn handle_failure(
    net: &SkywayNetwork,
    plan: &CompositionPlan,
    failure: &FailureEvent,
    strategy: Strategy,
    params: &RecomposeParams,
) -> Result<(CompositionPlan, RecompositionResult)> {
    let (fu, fv) = failure.failed_edge;
    let k = plan
        .segment_position(fu, fv)
        .ok_or_else(|| SkywayError::Mismatch(format!("segment {fu}-{fv} is not part of the plan")))?;
    let seg = &plan.services[k];
    if failure.timestamp > seg.start_time {
        return Err(SkywayError::Precondition(format!(
            "segment {}-{} was entered at t={} before the failure at t={}",
            seg.start_location, seg.end_location, seg.start_time, failure.timestamp
        )));
    }
    let (u, v) = (seg.start_location, seg.end_location);
    let view = net.with_failed_edge(u, v)?;

    if strategy == Strategy::Global {
        let dest = plan.request.destination;
        let result = global_recompose(&view, u, dest)?;
        let path = result.path.clone().ok_or(SkywayError::Unreachable { from: u, to: dest })?;
        let mut services = plan.services[..k].to_vec();
        let next_id = plan.services.iter().map(|s| s.service_id).max().unwrap_or(0) + 1;
        let drone = seg.drone.clone();
        services.extend(services_along(&view, &path, &drone, next_id, seg.start_time, plan.speed));
        let prefix: f64 = plan.services[..k].iter().map(|s| s.length()).sum();
        let new_plan = CompositionPlan {
            request: plan.request,
            services,
            total_length: prefix + path.total_length,
            speed: plan.speed,
        };
        return Ok((new_plan, result));
    }

    let result = recompose(&view, u, v, strategy, params)?;
    let detour = result.path.as_ref().ok_or(SkywayError::Unreachable { from: u, to: v })?;
    let new_plan = splice_plan(&view, plan, failure, detour)?;
    Ok((new_plan, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::net5;

    fn request(source: NodeIx, destination: NodeIx) -> CustomerDeliveryRequest {
        CustomerDeliveryRequest {
            source,
            destination,
            start_time: 0.0,
            package_weight: 1.5,
        }
    }

    #[test]
    fn initial_plan_on_fixture() {
        let net = net5();
        let plan = compose_initial(&net, request(0, 1), 1.0).unwrap();
        assert_eq!(plan.services.len(), 1);
        assert_eq!(plan.total_length, 10.0);
        let s = &plan.services[0];
        assert_eq!((s.start_location, s.end_location), (0, 1));
        assert_eq!(s.qos["length"], 10.0);
        assert_eq!(s.qos["cost"], 10.0);
        assert_eq!(s.end_time, 10.0);
        plan.validate().unwrap();
    }

    #[test]
    fn multi_hop_plan_is_chained_in_time() {
        let net = net5();
        let plan = compose_initial(&net, request(2, 4), 2.0).unwrap();
        assert_eq!(plan.walk(), vec![2, 1, 4]);
        plan.validate().unwrap();
        assert_eq!(plan.services[1].start_time, plan.services[0].end_time);
        for s in &plan.services {
            assert_eq!(s.qos["length"], net.find_edge(s.start_location, s.end_location).unwrap().length);
        }
    }

    #[test]
    fn unreachable_request() {
        use crate::network::Node;
        let n = |id, x| Node { id, x, y: 0.0 };
        let split =
            SkywayNetwork::from_parts(vec![n(0, 0.0), n(1, 1.0), n(2, 5.0), n(3, 6.0)], [(0, 1, None), (2, 3, None)])
                .unwrap();
        assert!(matches!(
            compose_initial(&split, request(0, 3), 1.0),
            Err(SkywayError::Unreachable { from: 0, to: 3 })
        ));
        let net = net5();
        assert!(matches!(
            compose_initial(&net, request(0, 0), 1.0),
            Err(SkywayError::Precondition(_))
        ));
    }

    #[test]
    fn two_phased_failure_handling_on_fixture() {
        let net = net5();
        let plan = compose_initial(&net, request(0, 1), 1.0).unwrap();
        let failure = FailureEvent::segment_outage(&net, &plan, 0, 1).unwrap();
        let (new_plan, result) =
            handle_failure(&net, &plan, &failure, Strategy::TwoPhased, &RecomposeParams::default()).unwrap();
        assert_eq!(new_plan.walk(), vec![0, 2, 1]);
        assert!((new_plan.total_length - 2.0 * 41f64.sqrt()).abs() < 1e-9);
        assert!(!result.fell_back_to_global);
        new_plan.validate().unwrap();
    }

    #[test]
    fn global_strategy_matches_dijkstra() {
        let net = net5();
        let plan = compose_initial(&net, request(2, 4), 1.0).unwrap();
        let failure = FailureEvent::segment_outage(&net, &plan, 2, 1).unwrap();
        let (new_plan, _) =
            handle_failure(&net, &plan, &failure, Strategy::Global, &RecomposeParams::default()).unwrap();
        let view = net.with_failed_edge(2, 1).unwrap();
        let (best, _) = dijkstra(&view, 2, 4, None).unwrap().unwrap();
        assert_eq!(new_plan.walk(), best.nodes);
        assert!((new_plan.total_length - best.total_length).abs() < 1e-9);
        new_plan.validate().unwrap();
        for strategy in [Strategy::Radius, Strategy::CellDensity, Strategy::TwoPhased] {
            let (local, _) = handle_failure(&net, &plan, &failure, strategy, &RecomposeParams::default()).unwrap();
            local.validate().unwrap();
            assert!(new_plan.total_length <= local.total_length + 1e-9);
        }
    }

    #[test]
    fn traversed_segment_is_rejected() {
        let net = net5();
        let plan = compose_initial(&net, request(2, 4), 1.0).unwrap();
        let mut failure = FailureEvent::segment_outage(&net, &plan, 2, 1).unwrap();
        failure.timestamp = plan.services[0].end_time + 1.0;
        assert!(matches!(
            handle_failure(&net, &plan, &failure, Strategy::Radius, &RecomposeParams::default()),
            Err(SkywayError::Precondition(_))
        ));
    }

    #[test]
    fn destination_cut_off() {
        let net = net5();
        let plan = compose_initial(&net, request(0, 4), 1.0).unwrap();
        let failure = FailureEvent::segment_outage(&net, &plan, 1, 4).unwrap();
        for strategy in [Strategy::Global, Strategy::TwoPhased] {
            assert!(matches!(
                handle_failure(&net, &plan, &failure, strategy, &RecomposeParams::default()),
                Err(SkywayError::Unreachable { .. })
            ));
        }
    }

    #[test]
    fn plan_json_has_services() {
        let net = net5();
        let plan = compose_initial(&net, request(2, 4), 1.0).unwrap();
        let v = serde_json::to_value(&plan).unwrap();
        assert_eq!(v["services"].as_array().unwrap().len(), 2);
        assert!(v["services"][0]["qos"]["battery"].is_number());
        let back: CompositionPlan = serde_json::from_value(v).unwrap();
        assert_eq!(back, plan);
    }
}
