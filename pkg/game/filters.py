import django_filters
from .models import RunRecord


class RunRecordFilter(django_filters.FilterSet):
	scenario_id = django_filters.CharFilter(
		lookup_expr='exact',
		label="Scenario ID",
		help_text="Filter by the scenario id of the run (e.g., 'fig1-halves'). Exact match."
	)
	status = django_filters.ChoiceFilter(
		choices=RunRecord.STATUS_CHOICES,
		label="Status",
		help_text="Filter by run status: 'ok' or 'failed'."
	)
	eps = django_filters.RangeFilter(
		label="Regularization Range",
		help_text="Filter by the regularization parameter. Use 'eps_min' and 'eps_max'."
	)

	class Meta:
		model = RunRecord
		fields = []
